#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "setrecon/field.hpp"

namespace setrecon {

/// Dense polynomial over F_q; coefficient i multiplies x^i.
///
/// Always normalized: the highest stored coefficient is nonzero, and the zero
/// polynomial is the empty sequence with degree -1. Coefficients are assumed
/// canonical for whatever field the caller operates in.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<FieldElement> coeffs);

    static Polynomial constant(FieldElement c) { return Polynomial(std::vector<FieldElement>{c}); }
    static Polynomial one() { return constant(1); }
    /// x - root
    static Polynomial linear(FieldElement root, const PrimeField& field);
    /// Product of (x - r) over `roots`.
    static Polynomial from_roots(std::span<const FieldElement> roots, const PrimeField& field);

    bool is_zero() const noexcept { return coeffs_.empty(); }
    std::ptrdiff_t degree() const noexcept { return static_cast<std::ptrdiff_t>(coeffs_.size()) - 1; }
    FieldElement leading() const noexcept { return coeffs_.empty() ? 0 : coeffs_.back(); }
    bool is_monic() const noexcept { return leading() == 1; }
    FieldElement coeff(std::size_t i) const noexcept { return i < coeffs_.size() ? coeffs_[i] : 0; }
    const std::vector<FieldElement>& coeffs() const noexcept { return coeffs_; }

    bool operator==(const Polynomial&) const = default;

private:
    void normalize();

    std::vector<FieldElement> coeffs_;
};

/// Horner evaluation.
FieldElement eval(const Polynomial& p, FieldElement x, const PrimeField& field);

Polynomial add(const Polynomial& a, const Polynomial& b, const PrimeField& field);
Polynomial sub(const Polynomial& a, const Polynomial& b, const PrimeField& field);
Polynomial mul(const Polynomial& a, const Polynomial& b, const PrimeField& field);
Polynomial scale(const Polynomial& p, FieldElement s, const PrimeField& field);

struct DivMod {
    Polynomial quotient;
    Polynomial remainder;
};

/// Throws Errc::DivisionByZeroPolynomial when the divisor is zero.
DivMod divmod(const Polynomial& dividend, const Polynomial& divisor, const PrimeField& field);

/// Scales p so its leading coefficient is 1. The zero polynomial is returned unchanged.
Polynomial make_monic(const Polynomial& p, const PrimeField& field);

/// Monic gcd by Euclid. Throws Errc::BothZero when both inputs are zero.
Polynomial gcd(const Polynomial& a, const Polynomial& b, const PrimeField& field);

/// base^e mod modulus (modulus nonzero).
Polynomial pow_mod(const Polynomial& base, u64 e, const Polynomial& modulus, const PrimeField& field);

struct Point {
    FieldElement x;
    FieldElement y;
};

/// Lagrange interpolation: the unique polynomial of degree < points.size()
/// through every point. Throws Errc::DuplicatePoint on a repeated x.
Polynomial interpolate(std::span<const Point> points, const PrimeField& field);

/// Reduced fraction num/den with both parts monic and gcd(num, den) = 1.
struct RationalFunction {
    Polynomial num;
    Polynomial den;

    bool operator==(const RationalFunction&) const = default;
};

/// Recovers P/Q from ratio samples r_i = P(x_i)/Q(x_i).
///
/// `delta` is deg P - deg Q and `bound` caps deg P + deg Q. The first bound+1
/// samples build the linear system; every sample (including any extra
/// verification samples) is checked against the reduced result.
///
/// Throws Errc::NoSolution when the system is inconsistent and
/// Errc::VerificationFailed when the reduced fraction misses a sample.
RationalFunction rational_interpolate(std::span<const Point> samples, long long delta, std::size_t bound,
                                      const PrimeField& field);

/// Attempts per random split before giving up.
inline constexpr int kSplitRetryLimit = 64;
/// Fields at most this large are searched exhaustively.
inline constexpr u64 kExhaustiveRootScanLimit = 4096;

/// All roots of a nonzero polynomial that splits into distinct linear factors
/// over F_q, sorted ascending.
///
/// Throws Errc::DoesNotSplit when p has repeated or non-rational roots, and
/// Errc::RetryLimitExceeded when random splitting keeps failing. The result is
/// checked by multiplying the linear factors back together.
std::vector<FieldElement> roots(const Polynomial& p, const PrimeField& field, std::mt19937_64& rng);

}  // namespace setrecon
