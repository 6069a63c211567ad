#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace mathcheck {

using Integer = boost::multiprecision::cpp_int;
// Always kept in lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }
inline bool is_integer(const Rational& q) { return denominator_of(q) == 1; }

// "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& q);
// Decimal rendering when the expansion terminates, e.g. 3/8 -> "0.375".
std::optional<std::string> to_decimal(const Rational& q);
// Accepts "12", "-7", "1.25", "3/4".
Rational parse_rational(std::string_view text);

// q^e for any integer e; throws DivisionByZero for 0^e with e < 0.
Rational pow(const Rational& base, long exponent);

double to_double(const Rational& q);

}  // namespace mathcheck
