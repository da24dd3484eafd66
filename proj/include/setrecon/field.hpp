#pragma once

#include <cstdint>

#include "setrecon/error.hpp"

namespace setrecon {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// Canonical residue in [0, q).
using FieldElement = u64;

inline constexpr u64 kMaxModulus = (u64{1} << 61) - 1;

// Free-standing arithmetic mod q. Operands must already be canonical.

inline FieldElement add_mod(FieldElement a, FieldElement b, u64 q) noexcept {
    // a, b < 2^61 so the sum cannot wrap.
    const u64 s = a + b;
    return s >= q ? s - q : s;
}

inline FieldElement sub_mod(FieldElement a, FieldElement b, u64 q) noexcept {
    return a >= b ? a - b : a + (q - b);
}

inline FieldElement neg_mod(FieldElement a, u64 q) noexcept {
    return a == 0 ? 0 : q - a;
}

inline FieldElement mul_mod(FieldElement a, FieldElement b, u64 q) noexcept {
    if (q <= 0xffffffffULL) return (a * b) % q;
    return static_cast<u64>((static_cast<u128>(a) * b) % q);
}

FieldElement pow_mod(FieldElement a, u64 e, u64 q) noexcept;

/// Throws Errc::ZeroInverse for a == 0.
FieldElement inv_mod(FieldElement a, u64 q);

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(u64 n) noexcept;

/// Arithmetic context bound to one prime modulus.
class PrimeField {
public:
    explicit PrimeField(u64 q);

    u64 modulus() const noexcept { return q_; }

    FieldElement reduce(u64 x) const noexcept { return x % q_; }
    FieldElement add(FieldElement a, FieldElement b) const noexcept { return add_mod(a, b, q_); }
    FieldElement sub(FieldElement a, FieldElement b) const noexcept { return sub_mod(a, b, q_); }
    FieldElement neg(FieldElement a) const noexcept { return neg_mod(a, q_); }
    FieldElement mul(FieldElement a, FieldElement b) const noexcept { return mul_mod(a, b, q_); }
    FieldElement pow(FieldElement a, u64 e) const noexcept { return pow_mod(a, e, q_); }
    FieldElement inv(FieldElement a) const { return inv_mod(a, q_); }
    FieldElement div(FieldElement a, FieldElement b) const { return mul(a, inv(b)); }

    bool operator==(const PrimeField&) const = default;

private:
    u64 q_;
};

/// Shared field configuration for one reconciliation session.
///
/// `owner_count` is the number of parties whose index may be folded into an
/// encoded element (1 disables owner encoding). Every element that can ever be
/// placed in a sketch is below `element_bound()`, and the evaluation points sit
/// strictly above it.
struct FieldParams {
    u64 q = 0;
    u64 m = 0;
    std::uint32_t owner_count = 1;
    std::uint32_t d = 0;
    std::uint32_t c = 0;

    bool owner_encoding() const noexcept { return owner_count > 1; }

    /// Exclusive upper bound on encodable field elements.
    u64 element_bound() const noexcept { return owner_encoding() ? m * (u64{owner_count} + 1) : m; }

    /// Smallest admissible modulus for these (m, owner_count, d, c).
    u64 min_modulus() const noexcept { return element_bound() + d + c + 1; }

    bool operator==(const FieldParams&) const = default;
};

/// Throws Errc::InvalidArgument if q is not prime or too small for the layout.
void validate(const FieldParams& params);

/// Smallest prime modulus satisfying the FieldParams invariant.
FieldParams choose_field(u64 m, std::uint32_t owner_count, std::uint32_t d, std::uint32_t c);

}  // namespace setrecon
