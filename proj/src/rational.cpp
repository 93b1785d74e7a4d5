#include "flagint/rational.hpp"

#include <algorithm>
#include <regex>
#include <string>

#include "flagint/errors.hpp"

namespace flagint {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(long e) {
  cpp_int r = 1;
  for (long i = 0; i < e; ++i) r *= 10;
  return r;
}

// Leading zeros would make cpp_int read the digits as octal.
std::string strip_zeros(std::string digits) {
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  return digits;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  static const std::regex fraction(R"(^\s*([+-]?\d+)\s*/\s*(\d+)\s*$)");
  static const std::regex decimal(R"(^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$)");

  const std::string s(text);
  std::smatch mt;
  Rational r;
  if (std::regex_match(s, mt, fraction)) {
    const cpp_int den(strip_zeros(mt[2].str()));
    if (den == 0) throw ConfigError("rational '" + s + "' has zero denominator");
    std::string num = mt[1].str();
    const bool neg = !num.empty() && num[0] == '-';
    if (!num.empty() && (num[0] == '-' || num[0] == '+')) num.erase(0, 1);
    r = Rational(cpp_int(strip_zeros(num)), den);
    if (neg) r = -r;
  } else if (std::regex_match(s, mt, decimal) && (mt[2].length() + mt[3].length()) > 0) {
    const std::string int_part = mt[2].str();
    const std::string frac_part = mt[3].str();
    if (mt[4].length() > 6) throw ConfigError("exponent too large in '" + s + "'");
    const long exp10 = mt[4].matched ? std::stol(mt[4].str()) : 0L;
    const cpp_int digits(strip_zeros(int_part + frac_part));
    const long scale = static_cast<long>(frac_part.size()) - exp10;
    r = scale >= 0 ? Rational(digits, pow10(scale)) : Rational(digits * pow10(-scale));
    if (mt[1].str() == "-") r = -r;
  } else {
    throw ConfigError("cannot parse '" + s + "' as a rational number");
  }
  if (denominator(r) > kMaxInputDenominator) {
    throw ConfigError("'" + s + "' is not a rational with denominator <= 10^6");
  }
  return r;
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace flagint
