#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace diffusemix {

using Digest256 = std::array<std::uint8_t, 32>;

// Incremental SHA-256.
class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256 &) = delete;
  Sha256 &operator=(const Sha256 &) = delete;

  Sha256 &update(std::span<const std::uint8_t> bytes);
  Sha256 &update(std::string_view text);
  // Appends an 8-byte little-endian length, then the bytes.
  Sha256 &update_field(std::span<const std::uint8_t> bytes);
  Sha256 &update_field(std::string_view text);
  Digest256 finish();

private:
  void *ctx_;
};

Digest256 sha256(std::span<const std::uint8_t> bytes);
Digest256 sha256(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace diffusemix
