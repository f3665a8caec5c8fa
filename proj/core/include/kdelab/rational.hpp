#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace kdelab {

/// Exact rational used to decide strict inequalities without tolerance.
/// Every finite double converts exactly.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", an integer, or a decimal literal ("0.3" is read as 3/10,
/// not as the nearest double).
Rational parse_rational(const std::string& text);

[[nodiscard]] std::string to_string(const Rational& r);
[[nodiscard]] double to_double(const Rational& r);

}  // namespace kdelab
