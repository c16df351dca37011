#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "quantcal/errors.hpp"

namespace quantcal::binio {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& os, double v) {
  auto bits = to_little(std::bit_cast<std::uint64_t>(v));
  os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

inline void write_bytes(std::ostream& os, std::string_view s) { os.write(s.data(), static_cast<std::streamsize>(s.size())); }

inline void read_exact(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw IoError(std::string("truncated input while reading ") + what);
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  read_exact(is, reinterpret_cast<char*>(&v), sizeof v, what);
  return to_little(v);
}

inline double read_f64(std::istream& is, const char* what) {
  std::uint64_t bits = 0;
  read_exact(is, reinterpret_cast<char*>(&bits), sizeof bits, what);
  return std::bit_cast<double>(to_little(bits));
}

inline std::string read_bytes(std::istream& is, std::size_t n, const char* what) {
  std::string s(n, '\0');
  read_exact(is, s.data(), n, what);
  return s;
}

inline void expect_magic(std::istream& is, std::string_view magic, const char* what) {
  if (read_bytes(is, magic.size(), what) != magic) {
    throw IoError(std::string(what) + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace quantcal::binio
