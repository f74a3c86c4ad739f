#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace realitygen {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);

/// First eight bytes of SHA-256, little-endian. Stable across platforms.
std::uint64_t stable_hash64(std::string_view text);

}  // namespace realitygen
