#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace flagint {

// Arbitrary-precision rational; exponent algebra never overflows.
using Rational = boost::multiprecision::cpp_rational;

// Largest denominator accepted when parsing user input.
inline constexpr long kMaxInputDenominator = 1'000'000;

/// Parses "p/q", an integer, or a finite decimal ("0.35", "-1.5e-2") into an
/// exact rational. Throws ConfigError if the text is malformed or the reduced
/// denominator exceeds kMaxInputDenominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form ("3" when the denominator is 1).
std::string to_string(const Rational& r);

double to_double(const Rational& r);

}  // namespace flagint
