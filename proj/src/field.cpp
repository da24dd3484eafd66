#include "setrecon/field.hpp"

#include <array>
#include <string>

namespace setrecon {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::ZeroInverse: return "ZeroInverse";
    case Errc::FieldTooLarge: return "FieldTooLarge";
    case Errc::DivisionByZeroPolynomial: return "DivisionByZeroPolynomial";
    case Errc::BothZero: return "BothZero";
    case Errc::DuplicatePoint: return "DuplicatePoint";
    case Errc::NoSolution: return "NoSolution";
    case Errc::VerificationFailed: return "VerificationFailed";
    case Errc::DoesNotSplit: return "DoesNotSplit";
    case Errc::RetryLimitExceeded: return "RetryLimitExceeded";
    case Errc::KeyOutOfRange: return "KeyOutOfRange";
    case Errc::ParamsMismatch: return "ParamsMismatch";
    case Errc::DifferenceBoundExceeded: return "DifferenceBoundExceeded";
    case Errc::OwnerOutOfRange: return "OwnerOutOfRange";
    case Errc::DuplicateParty: return "DuplicateParty";
    case Errc::EmptyRelay: return "EmptyRelay";
    case Errc::GraphTooLarge: return "GraphTooLarge";
    case Errc::Disconnected: return "Disconnected";
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

FieldElement pow_mod(FieldElement a, u64 e, u64 q) noexcept {
    FieldElement result = 1 % q;
    FieldElement base = a % q;
    while (e != 0) {
        if (e & 1) result = mul_mod(result, base, q);
        base = mul_mod(base, base, q);
        e >>= 1;
    }
    return result;
}

FieldElement inv_mod(FieldElement a, u64 q) {
    if (a % q == 0) throw Error(Errc::ZeroInverse, "inverse of zero");
    return pow_mod(a, q - 2, q);
}

namespace {

// Plain 128-bit modular exponentiation; is_prime accepts any 64-bit n.
u64 pow_wide(u64 a, u64 e, u64 n) {
    u128 result = 1;
    u128 base = a % n;
    while (e != 0) {
        if (e & 1) result = (result * base) % n;
        base = (base * base) % n;
        e >>= 1;
    }
    return static_cast<u64>(result);
}

}  // namespace

bool is_prime(u64 n) noexcept {
    if (n < 2) return false;
    constexpr std::array<u64, 12> small = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : small) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // These twelve bases are a proven deterministic witness set below 3.3e24.
    for (u64 a : small) {
        u64 x = pow_wide(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = static_cast<u64>((static_cast<u128>(x) * x) % n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeField::PrimeField(u64 q) : q_(q) {
    if (q < 2 || q > kMaxModulus) {
        throw Error(Errc::InvalidArgument, "modulus out of range: " + std::to_string(q));
    }
}

void validate(const FieldParams& params) {
    if (params.m == 0) throw Error(Errc::InvalidArgument, "universe size m must be >= 1");
    if (params.owner_count == 0) throw Error(Errc::InvalidArgument, "owner_count must be >= 1");
    const u128 bound = static_cast<u128>(params.m) * (params.owner_encoding() ? params.owner_count + 1ULL : 1ULL) +
                       params.d + params.c + 1;
    if (params.q > kMaxModulus) throw Error(Errc::FieldTooLarge, "q exceeds 2^61-1");
    if (static_cast<u128>(params.q) < bound) {
        throw Error(Errc::InvalidArgument, "q=" + std::to_string(params.q) + " too small for universe and point layout");
    }
    if (!is_prime(params.q)) throw Error(Errc::InvalidArgument, "q=" + std::to_string(params.q) + " is not prime");
}

FieldParams choose_field(u64 m, std::uint32_t owner_count, std::uint32_t d, std::uint32_t c) {
    if (m == 0) throw Error(Errc::InvalidArgument, "universe size m must be >= 1");
    if (owner_count == 0) throw Error(Errc::InvalidArgument, "owner_count must be >= 1");
    const u128 multiplier = owner_count > 1 ? u128{owner_count} + 1 : 1;
    const u128 lower = u128{m} * multiplier + d + c + 1;
    if (lower > kMaxModulus) throw Error(Errc::FieldTooLarge, "required modulus exceeds 2^61-1");
    u64 q = static_cast<u64>(lower);
    while (!is_prime(q)) {
        ++q;
        if (q > kMaxModulus) throw Error(Errc::FieldTooLarge, "no prime modulus below 2^61-1");
    }
    return FieldParams{q, m, owner_count, d, c};
}

}  // namespace setrecon
