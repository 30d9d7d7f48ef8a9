// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gfnm::io {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order and require a little-endian host");

/// Appends little-endian fields to an in-memory buffer.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }
  /// u32 length prefix.
  void string(std::string_view s);
  void f64_array(std::span<const double> values);
  void bytes(std::span<const std::uint8_t> values) { raw(values.data(), values.size()); }

  const std::vector<std::uint8_t>& buffer() const noexcept { return bytes_; }

 private:
  void raw(const void* p, std::size_t n);
  std::vector<std::uint8_t> bytes_;
};

/// Reads fields back; any overrun throws DataError naming `context`.
class BinaryReader {
 public:
  BinaryReader(std::span<const std::uint8_t> bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  bool boolean();
  void expect_magic(std::string_view tag);
  std::string string();
  void f64_array(std::span<double> out);
  void bytes(std::span<std::uint8_t> out);

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void raw(void* p, std::size_t n);
  std::span<const std::uint8_t> bytes_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gfnm::io
