#pragma once

#include <array>
#include <charconv>
#include <string>

namespace flowdir {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace flowdir
