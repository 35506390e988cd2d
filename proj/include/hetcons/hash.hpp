#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hetcons {

using Digest = std::array<unsigned char, 32>;

Digest sha256(std::string_view data);
std::string to_hex(const Digest& d);
Digest from_hex(std::string_view hex);

// Deterministic scrambler for seeded simulation randomness.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hetcons
