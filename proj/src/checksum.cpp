#include "realitygen/checksum.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "realitygen/error.hpp"

namespace realitygen {
namespace {

std::array<unsigned char, 32> sha256(const void* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, 32> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw Error(ErrorKind::IoFailure, "SHA-256 computation failed");
  }
  return out;
}

std::string hex(const std::array<unsigned char, 32>& digest) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (unsigned char b : digest) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

}  // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
  return hex(sha256(bytes.data(), bytes.size()));
}

std::string sha256_hex(std::string_view text) { return hex(sha256(text.data(), text.size())); }

std::uint64_t stable_hash64(std::string_view text) {
  const auto d = sha256(text.data(), text.size());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | d[std::size_t(i)];
  return v;
}

}  // namespace realitygen
