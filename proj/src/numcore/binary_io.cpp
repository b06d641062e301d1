#include "uaplab/numcore/binary_io.hpp"

#include <array>
#include <bit>

namespace uaplab::num {
namespace {

constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;
constexpr std::uint32_t kMaxString = 1u << 16;

}  // namespace

void BinaryWriter::magic(std::string_view tag) { out_.write(tag.data(), std::streamsize(tag.size())); }

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out_.write(b.data(), 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out_.write(b.data(), 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), std::streamsize(s.size()));
}

void BinaryWriter::tensor(const Tensor& t) {
  u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) u64(d);
  for (double v : t.data()) f64(v);
}

void BinaryReader::read_bytes(char* dst, std::size_t n) {
  in_.read(dst, std::streamsize(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("unexpected end of file");
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  read_bytes(got.data(), got.size());
  if (got != tag) throw FormatError("bad magic: expected '" + std::string(tag) + "'");
}

std::uint8_t BinaryReader::u8() {
  char c = 0;
  read_bytes(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t BinaryReader::u32() {
  std::array<char, 4> b{};
  read_bytes(b.data(), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::array<char, 8> b{};
  read_bytes(b.data(), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  if (n > kMaxString) throw FormatError("string field too long");
  std::string s(n, '\0');
  read_bytes(s.data(), n);
  return s;
}

Tensor BinaryReader::tensor() {
  const std::uint32_t rank = u32();
  if (rank > kMaxRank) throw FormatError("tensor rank " + std::to_string(rank) + " too large");
  Shape shape(rank);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    d = u64();
    count *= d;
    if (count > kMaxElements) throw FormatError("tensor too large");
  }
  std::vector<double> data(count);
  for (double& v : data) v = f64();
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace uaplab::num
