#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "divhash/error.hpp"

namespace divhash::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; add byte swapping for this host");

template <typename T>
  requires std::is_arithmetic_v<T>
void write_pod(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T read_pod(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw IoError("unexpected end of file");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_magic(std::ostream& out, std::string_view magic);
void expect_magic(std::istream& in, std::string_view magic);

}  // namespace divhash::detail
