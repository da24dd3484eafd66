#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "setrecon/field.hpp"

namespace setrecon {

/// Field parameters plus the evaluation-point layout.
///
/// Point j is q-1-j for j = 0..d+c: the first d+1 drive interpolation and the
/// remaining c are held back for verification. All points lie above
/// `field.element_bound()`, so no encodable element ever zeroes a coordinate.
class SketchParams {
public:
    SketchParams() = default;
    /// Validates `field` (prime modulus, point/element disjointness).
    explicit SketchParams(const FieldParams& field);

    const FieldParams& field() const noexcept { return field_; }
    const PrimeField& prime_field() const noexcept { return prime_; }
    u64 q() const noexcept { return field_.q; }
    u64 m() const noexcept { return field_.m; }
    std::uint32_t d() const noexcept { return field_.d; }
    std::uint32_t c() const noexcept { return field_.c; }
    std::size_t size() const noexcept { return std::size_t{field_.d} + field_.c + 1; }

    FieldElement point(std::size_t j) const noexcept { return field_.q - 1 - j; }
    std::vector<FieldElement> points() const;

    bool operator==(const SketchParams& other) const noexcept { return field_ == other.field_; }

private:
    FieldParams field_{2, 1, 1, 0, 0};
    PrimeField prime_{2};
};

/// Evaluations of a set's characteristic polynomial at the layout points,
/// tagged with the set's cardinality. Coordinates are never zero.
class Sketch {
public:
    /// Throws Errc::InvalidArgument on a size mismatch or a zero/non-canonical coordinate.
    Sketch(SketchParams params, std::vector<FieldElement> evals, u64 cardinality);

    /// Sketch of the empty set: all ones.
    static Sketch empty(const SketchParams& params);

    const SketchParams& params() const noexcept { return params_; }
    const std::vector<FieldElement>& evals() const noexcept { return evals_; }
    u64 cardinality() const noexcept { return cardinality_; }

    bool operator==(const Sketch&) const = default;

private:
    SketchParams params_;
    std::vector<FieldElement> evals_;
    u64 cardinality_ = 0;
};

/// Key paired with an owner index. Index 0 is the "owned by all"/leader marker.
struct OwnerElement {
    u64 value = 0;
    std::uint32_t owner = 0;

    auto operator<=>(const OwnerElement&) const = default;
};

/// value + m * owner. Throws Errc::KeyOutOfRange / Errc::OwnerOutOfRange.
FieldElement encode_owner(u64 value, std::uint32_t owner, const FieldParams& params);
/// (e mod m, e div m).
OwnerElement decode_owner(FieldElement encoded, u64 m);

/// Sketch of a key set; keys must be distinct and below m.
Sketch make_sketch(std::span<const u64> keys, const SketchParams& params);
/// Sketch of already-encoded field elements (each below params.field().element_bound()).
Sketch make_element_sketch(std::span<const FieldElement> elements, const SketchParams& params);
/// Sketch of {value + m * owner}.
Sketch make_owner_sketch(std::span<const OwnerElement> elements, const SketchParams& params);

/// Coordinate-wise product; cardinalities add.
Sketch pointwise_mul(const Sketch& a, const Sketch& b);
/// Coordinate-wise quotient; cardinalities subtract (wrapping if the caller's
/// containment precondition does not hold).
Sketch pointwise_div(const Sketch& a, const Sketch& b);

struct SetDifference {
    std::vector<u64> a_minus_b;
    std::vector<u64> b_minus_a;

    bool operator==(const SetDifference&) const = default;
};

/// Both one-sided differences of the sketched key sets, each sorted.
///
/// Throws Errc::DifferenceBoundExceeded if decoding fails for any reason
/// (inconsistent system, failed verification, non-splitting factor, or a root
/// outside the key universe).
SetDifference recover_difference(const Sketch& a, const Sketch& b);

/// Sketch of the union of the two underlying key sets.
Sketch combine_union(const Sketch& a, const Sketch& b);

/// Keys in the union sketch's set that are missing from `own` (own ⊆ union), sorted.
///
/// Throws Errc::DifferenceBoundExceeded or Errc::VerificationFailed.
std::vector<u64> recover_missing(const Sketch& union_sketch, const Sketch& own);

/// Same as recover_missing, but in the encoded domain: returns field elements
/// below params.field().element_bound().
std::vector<FieldElement> recover_missing_elements(const Sketch& superset, const Sketch& subset);

}  // namespace setrecon
