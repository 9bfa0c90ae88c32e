#include "hisense/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hisense/error.hpp"

namespace hisense::io {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u & 0xFFu));
    u = static_cast<U>(u >> 8);
  }
}

}  // namespace

void BinaryWriter::magic(std::string_view tag) {
  bytes_.insert(bytes_.end(), tag.begin(), tag.end());
}

void BinaryWriter::u8(std::uint8_t v) { bytes_.push_back(v); }
void BinaryWriter::u32(std::uint32_t v) { put_le(bytes_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(bytes_, v); }
void BinaryWriter::i32(std::int32_t v) { put_le(bytes_, v); }
void BinaryWriter::f64(double v) { put_le(bytes_, std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void BinaryWriter::f64_array(std::span<const double> values) {
  u64(values.size());
  for (double v : values) f64(v);
}

void BinaryWriter::i8_array(std::span<const std::int8_t> values) {
  u64(values.size());
  for (auto v : values) bytes_.push_back(static_cast<std::uint8_t>(v));
}

void BinaryWriter::i32_array(std::span<const std::int32_t> values) {
  u64(values.size());
  for (auto v : values) i32(v);
}

void BinaryWriter::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes_.data()),
            static_cast<std::streamsize>(bytes_.size()));
  if (!out) throw Error("write failed: " + path.string());
}

BinaryReader::BinaryReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

BinaryReader BinaryReader::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return BinaryReader(std::move(bytes));
}

void BinaryReader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw FormatError("truncated container");
}

void BinaryReader::expect_magic(std::string_view tag) {
  need(tag.size());
  if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0) {
    throw FormatError("bad magic, expected '" + std::string(tag) + "'");
  }
  pos_ += tag.size();
}

std::uint8_t BinaryReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
  pos_ += 4;
  return v;
}

std::uint64_t BinaryReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
  pos_ += 8;
  return v;
}

std::int32_t BinaryReader::i32() { return static_cast<std::int32_t>(u32()); }
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const auto n = u64();
  need(n);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::vector<double> BinaryReader::f64_array() {
  const auto n = u64();
  need(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

std::vector<std::int8_t> BinaryReader::i8_array() {
  const auto n = u64();
  need(n);
  std::vector<std::int8_t> out(n);
  for (auto& v : out) v = static_cast<std::int8_t>(bytes_[pos_++]);
  return out;
}

std::vector<std::int32_t> BinaryReader::i32_array() {
  const auto n = u64();
  need(n * 4);
  std::vector<std::int32_t> out(n);
  for (auto& v : out) v = i32();
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return s;
}

}  // namespace hisense::io
