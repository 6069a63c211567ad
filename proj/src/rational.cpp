#include "mathcheck/rational.hpp"

#include "mathcheck/errors.hpp"

#include <cctype>

namespace mathcheck {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::string message,
                         std::vector<std::string> expected)
    : Error([&] {
        std::string what = "line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + message;
        if (!expected.empty()) {
          what += " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) what += i + 1 == expected.size() ? " or " : ", ";
            what += expected[i];
          }
          what += ")";
        }
        return what;
      }()),
      line_(line),
      column_(column),
      detail_(std::move(message)),
      expected_(std::move(expected)) {}

FormalizationFailed::FormalizationFailed(std::vector<std::string> diagnostics)
    : Error([&] {
        std::string what = "formalization failed after " + std::to_string(diagnostics.size()) +
                           " attempt(s)";
        if (!diagnostics.empty()) what += ": " + diagnostics.back();
        return what;
      }()),
      diagnostics_(std::move(diagnostics)) {}

std::string to_string(const Rational& q) {
  if (is_integer(q)) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + denominator_of(q).str();
}

std::optional<std::string> to_decimal(const Rational& q) {
  Integer den = denominator_of(q);
  int twos = 0, fives = 0;
  while (den % 2 == 0) den /= 2, ++twos;
  while (den % 5 == 0) den /= 5, ++fives;
  if (den != 1) return std::nullopt;
  const int digits = std::max(twos, fives);
  Integer scaled = numerator_of(q) * boost::multiprecision::pow(Integer(10), digits) / denominator_of(q);
  const bool negative = scaled < 0;
  std::string s = (negative ? Integer(-scaled) : scaled).str();
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
  }
  return negative ? "-" + s : s;
}

Rational parse_rational(std::string_view text) {
  auto bad = [&] { return Error("malformed number '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') negative = text[0] == '-', ++i;
  std::string digits, fraction;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
  if (digits.empty()) throw bad();
  // cpp_int reads a leading 0 as an octal prefix.
  auto decimal = [](std::string d) {
    const auto nz = d.find_first_not_of('0');
    return Integer(nz == std::string::npos ? std::string("0") : d.substr(nz));
  };
  Rational value;
  if (i < text.size() && text[i] == '/') {
    std::string den(text.substr(i + 1));
    if (den.empty() || den.find_first_not_of("0123456789") != std::string::npos) throw bad();
    Integer d = decimal(den);
    if (d == 0) throw bad();
    value = Rational(decimal(digits), d);
  } else {
    if (i < text.size() && text[i] == '.') {
      ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) fraction += text[i++];
      if (fraction.empty()) throw bad();
    }
    if (i != text.size()) throw bad();
    value = Rational(decimal(digits + fraction),
                     boost::multiprecision::pow(Integer(10), static_cast<unsigned>(fraction.size())));
  }
  return negative ? Rational(-value) : value;
}

Rational pow(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw DivisionByZero(to_string(base) + "^" + std::to_string(exponent));
    return Rational(1) / pow(base, -exponent);
  }
  Integer num = boost::multiprecision::pow(numerator_of(base), static_cast<unsigned>(exponent));
  Integer den = boost::multiprecision::pow(denominator_of(base), static_cast<unsigned>(exponent));
  return Rational(num, den);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace mathcheck
