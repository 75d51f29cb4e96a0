// Round-trip number formatting and small parsing helpers for the text formats.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "shb/common.hpp"

namespace shb::text {

/// Shortest decimal that parses back to the same double. Infinities print as
/// "inf"/"-inf", NaN as "nan".
std::string format(double value);
std::string format(const Vector& v, char sep = ',');

double parse_double(std::string_view s);
long long parse_int(std::string_view s);
Vector parse_vector(std::string_view s, char sep = ',');

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace shb::text
