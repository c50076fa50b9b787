#pragma once

#include <string>

namespace specloc {

/// Shortest decimal that parses back to the same double; integral values keep
/// a trailing ".0" so the column type stays unambiguous.
std::string format_number(double x);

}  // namespace specloc
