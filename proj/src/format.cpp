#include "specloc/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace specloc {

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  std::string s(buf.data(), res.ptr);
  if (std::isfinite(x) && s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

}  // namespace specloc
