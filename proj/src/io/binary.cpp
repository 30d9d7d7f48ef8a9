// SPDX-License-Identifier: Apache-2.0
#include "gfnm/io/binary.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "gfnm/errors.hpp"

namespace gfnm::io {

void BinaryWriter::raw(const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  bytes_.insert(bytes_.end(), b, b + n);
}

void BinaryWriter::string(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void BinaryWriter::f64_array(std::span<const double> values) {
  raw(values.data(), values.size() * sizeof(double));
}

void BinaryReader::raw(void* p, std::size_t n) {
  if (n > remaining())
    throw DataError(context_ + ": truncated at byte " + std::to_string(pos_) + " (need " +
                    std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
  if (n) std::memcpy(p, bytes_.data() + pos_, n);
  pos_ += n;
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  raw(&v, 1);
  return v;
}
std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  raw(&v, sizeof v);
  return v;
}
std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  raw(&v, sizeof v);
  return v;
}
double BinaryReader::f64() {
  double v;
  raw(&v, sizeof v);
  return v;
}
bool BinaryReader::boolean() {
  const auto v = u8();
  if (v > 1) throw DataError(context_ + ": invalid boolean byte at " + std::to_string(pos_ - 1));
  return v == 1;
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  raw(got.data(), got.size());
  if (got != tag) throw DataError(context_ + ": bad magic, expected '" + std::string(tag) + "'");
}

std::string BinaryReader::string() {
  const auto n = u32();
  if (n > remaining()) throw DataError(context_ + ": string length exceeds file size");
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void BinaryReader::f64_array(std::span<double> out) { raw(out.data(), out.size() * sizeof(double)); }
void BinaryReader::bytes(std::span<std::uint8_t> out) { raw(out.data(), out.size()); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const auto parent = path.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace gfnm::io
