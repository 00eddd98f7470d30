#pragma once

// Little-endian primitives shared by the feature and index file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "simanno/errors.hpp"

namespace simanno::binary {

template <typename T>
T byteswap(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void write_le_array(std::ostream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) write_le(out, v);
  }
}

/// Reads one value; throws IoError naming `what` on a short read.
template <typename T>
T read_le(std::istream& in, const char* what) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError(std::string("unexpected end of file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  return value;
}

template <typename T>
void read_le_array(std::istream& in, std::span<T> out, const char* what) {
  if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size_bytes()))) {
    throw IoError(std::string("unexpected end of file while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (T& v : out) v = byteswap(v);
  }
}

inline std::string read_bytes(std::istream& in, std::size_t n, const char* what) {
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw IoError(std::string("unexpected end of file while reading ") + what);
  }
  return s;
}

}  // namespace simanno::binary
