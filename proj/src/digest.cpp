#include "diffusemix/digest.hpp"

#include "diffusemix/errors.hpp"

#include <openssl/evp.h>

namespace diffusemix {

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr ||
      EVP_DigestInit_ex(static_cast<EVP_MD_CTX *>(ctx_), EVP_sha256(),
                        nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX *>(ctx_)); }

Sha256 &Sha256::update(std::span<const std::uint8_t> bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX *>(ctx_), bytes.data(), bytes.size());
  return *this;
}

Sha256 &Sha256::update(std::string_view text) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX *>(ctx_), text.data(), text.size());
  return *this;
}

Sha256 &Sha256::update_field(std::span<const std::uint8_t> bytes) {
  std::uint8_t len[8];
  std::uint64_t n = bytes.size();
  for (auto &b : len) {
    b = static_cast<std::uint8_t>(n & 0xFF);
    n >>= 8;
  }
  update(std::span<const std::uint8_t>(len));
  return update(bytes);
}

Sha256 &Sha256::update_field(std::string_view text) {
  return update_field(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

Digest256 Sha256::finish() {
  Digest256 out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX *>(ctx_), out.data(), &len);
  return out;
}

Digest256 sha256(std::span<const std::uint8_t> bytes) {
  return Sha256().update(bytes).finish();
}

Digest256 sha256(std::string_view text) { return Sha256().update(text).finish(); }

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw ProtocolError("base64 payload length is not a multiple of 4");
  }
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(),
                                reinterpret_cast<const unsigned char *>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) {
    throw ProtocolError("malformed base64 payload");
  }
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') {
    ++pad;
    if (text.size() >= 2 && text[text.size() - 2] == '=') {
      ++pad;
    }
  }
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

} // namespace diffusemix
