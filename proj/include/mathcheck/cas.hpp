#pragma once

#include "mathcheck/ast.hpp"
#include "mathcheck/eval.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mathcheck {

// Sorted (atom, exponent) pairs; exponents are positive. Atoms are variable
// names or the canonical key of an opaque subterm such as "f(x + 1)".
using Monomial = std::vector<std::pair<std::string, unsigned>>;

class Poly {
 public:
  Poly() = default;
  static Poly constant(const Rational& c);
  static Poly atom(const std::string& name);
  static Poly monomial(const Monomial& m, const Rational& c);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  Rational coefficient(const Monomial& m) const;
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  std::set<std::string> atoms() const;
  unsigned degree_in(const std::string& atom) const;
  unsigned total_degree() const;
  // Coefficient of atom^k, as a polynomial in the remaining atoms.
  Poly coefficient_in(const std::string& atom, unsigned k) const;
  // Leading term under lexicographic order on sorted atom names.
  std::pair<Monomial, Rational> leading() const;

  Poly operator-() const;
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rational& c) const;
  Poly pow(unsigned e) const;
  Poly derivative(const std::string& atom) const;
  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  void add_term(const Monomial& m, const Rational& c);
  std::map<Monomial, Rational> terms_;
};

// Quotient when `b` divides `a` exactly.
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);
// Monic greatest common divisor; gcd(0, 0) = 0.
Poly gcd(const Poly& a, const Poly& b);

// Canonical rational function num/den: gcd(num, den) = 1, den has leading
// coefficient 1, den = 1 when num = 0.
struct NormalForm {
  Poly num = Poly::constant(0);
  Poly den = Poly::constant(1);
  // Opaque atoms by key.
  std::map<std::string, Term> atoms;

  bool is_polynomial() const { return den.is_constant(); }
  bool has_opaque_atoms() const { return !atoms.empty(); }
  friend bool operator==(const NormalForm& a, const NormalForm& b) { return a.num == b.num && a.den == b.den; }
};

// Throws DivisionByZero when dividing by the zero function and UnsupportedTerm
// for exponents or degrees beyond kMaxDegree.
NormalForm normalize(const Term& t);
Term to_term(const NormalForm& nf);
nlohmann::json to_json(const NormalForm& nf);

constexpr unsigned kMaxDegree = 64;

struct EquivOptions {
  std::uint64_t seed = 0;
  int samples = 200;
  long bound = 1000000;  // numerators and denominators of sample points
};

struct EquivVerdict {
  enum class Kind { Equal, NotEqual, Unknown };
  Kind kind = Kind::Unknown;
  // NotEqual: the point (variables and any function values it relies on) and both values.
  Valuation witness;
  Rational lhs_value, rhs_value;
  std::string reason;
};

std::string_view verdict_name(EquivVerdict::Kind k);

EquivVerdict equiv(const Term& a, const Term& b, const EquivOptions& options = {});

// a + b * sqrt(d), with d a square-free integer > 1 when b != 0.
struct Root {
  Rational a;
  Rational b = 0;
  Integer d = 0;

  bool is_rational() const { return b == 0; }
  double approx() const;
  std::string to_string() const;
  friend bool operator==(const Root&, const Root&) = default;
};

// Real roots of lhs = rhs in v, ascending and without multiplicity. Points
// where a denominator vanishes are dropped. Throws NotUnivariate,
// DegreeTooHigh, or Error when the equation holds identically.
std::vector<Root> solve_univariate(const Term& lhs, const Term& rhs, const std::string& v);

// Derivative in normal form. Throws UnsupportedTerm when an opaque atom depends on v.
Term differentiate(const Term& t, const std::string& v);

}  // namespace mathcheck
