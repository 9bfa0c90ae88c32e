#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hisense::io {

// Little-endian byte sink used by every model container. Doubles are written
// as their IEEE-754 bit patterns so round trips are bit-exact.
class BinaryWriter {
 public:
  void magic(std::string_view tag);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v);
  void f64(double v);
  void str(std::string_view s);
  void f64_array(std::span<const double> values);
  void i8_array(std::span<const std::int8_t> values);
  void i32_array(std::span<const std::int32_t> values);

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> bytes_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::vector<std::uint8_t> bytes);
  static BinaryReader open(const std::filesystem::path& path);

  // Throws FormatError if the next bytes are not `tag`.
  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string str();
  std::vector<double> f64_array();
  std::vector<std::int8_t> i8_array();
  std::vector<std::int32_t> i32_array();

  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// FNV-1a, 64-bit; used for config provenance hashes.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace hisense::io
