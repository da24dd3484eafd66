#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "setrecon/sketch.hpp"

namespace setrecon {

// One sketch message, all integers big-endian:
//
//   "RCSK" | version u8 | flags u8 | q u64 | d u32 | c u32 | m u64 | N u32 |
//   cardinality u64 | (d+c+1) x u64 evals
//
// flags bit 0 marks owner-encoded contents.

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 42;
inline constexpr std::uint8_t kFlagOwnerEncoded = 0x01;

struct SketchMessage {
    Sketch sketch;
    bool owner_encoded = false;
};

/// Encoded size of one message under `params`: 42 + 8 (d + c + 1).
std::size_t message_size(const SketchParams& params) noexcept;

std::vector<std::uint8_t> encode_message(const Sketch& sketch, bool owner_encoded = false);

/// Throws Errc::MalformedMessage on any framing or range violation.
SketchMessage decode_message(std::span<const std::uint8_t> bytes);

}  // namespace setrecon
