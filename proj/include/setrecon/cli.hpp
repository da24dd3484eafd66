#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "setrecon/field.hpp"

namespace setrecon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProtocol = 3;

/// One unsigned decimal key per line, distinct, each below m. Blank lines are
/// ignored. Throws Errc::ParseError naming the offending line.
std::vector<u64> parse_key_set(std::istream& in, u64 m, const std::string& source = "<stream>");
std::vector<u64> read_key_set(const std::filesystem::path& path, u64 m);

/// ceil(log2 C(n, k)), the bits needed to name k elements out of n.
std::uint64_t information_floor_bits(u64 n, u64 k);

/// Entry point shared by the `setrecon` binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace setrecon::cli
