#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace setrecon {

/// SplitMix64 step (Steele, Lea, Flood). Fully specified, so every platform
/// produces the same stream; std distributions are not used anywhere a
/// reproducible draw matters.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = kMax - (kMax % bound);
        std::uint64_t x = 0;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by SplitMix64::below.
template <typename T>
void deterministic_shuffle(std::span<T> items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace setrecon
