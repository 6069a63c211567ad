#include "mathcheck/cas.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include <boost/multiprecision/integer.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace mathcheck {

namespace {

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    }
  }
  return out;
}

std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0;
  for (const auto& [name, e] : b) {
    while (i < a.size() && a[i].first < name) out.push_back(a[i++]);
    if (i == a.size() || a[i].first != name || a[i].second < e) return std::nullopt;
    if (a[i].second > e) out.emplace_back(name, a[i].second - e);
    ++i;
  }
  while (i < a.size()) out.push_back(a[i++]);
  return out;
}

// Lexicographic order: earlier atom names dominate, higher exponents win.
bool lex_greater(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first != b[j].first) return a[i].first < b[j].first;
    if (a[i].second != b[j].second) return a[i].second > b[j].second;
    ++i, ++j;
  }
  return i < a.size();
}

unsigned mono_degree(const Monomial& m) {
  unsigned d = 0;
  for (const auto& [name, e] : m) d += e;
  return d;
}

Poly monic(const Poly& p) {
  if (p.is_zero()) return p;
  return p.scaled(Rational(1) / p.leading().second);
}

Poly pseudo_remainder(Poly r, const Poly& b, const std::string& x) {
  const unsigned db = b.degree_in(x);
  const Poly lcb = b.coefficient_in(x, db);
  while (!r.is_zero() && r.degree_in(x) >= db) {
    const unsigned dr = r.degree_in(x);
    Poly lcr = r.coefficient_in(x, dr);
    r = monic(r * lcb - lcr * Poly::atom(x).pow(dr - db) * b);
  }
  return r;
}

Poly content_in(const Poly& p, const std::string& x) {
  Poly g;
  for (unsigned k = 0; k <= p.degree_in(x); ++k) {
    Poly c = p.coefficient_in(x, k);
    if (c.is_zero()) continue;
    g = gcd(g, c);
    if (g.is_constant()) return Poly::constant(1);
  }
  return g;
}

Poly primitive_in(const Poly& p, const std::string& x) {
  return *divide_exact(p, content_in(p, x));
}

}  // namespace

Poly Poly::constant(const Rational& c) {
  Poly p;
  if (c != 0) p.terms_[{}] = c;
  return p;
}

Poly Poly::monomial(const Monomial& m, const Rational& c) {
  Poly p;
  p.add_term(m, c);
  return p;
}

Poly Poly::atom(const std::string& name) {
  Poly p;
  p.terms_[{{name, 1}}] = 1;
  return p;
}

Rational Poly::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

std::set<std::string> Poly::atoms() const {
  std::set<std::string> out;
  for (const auto& [m, c] : terms_)
    for (const auto& [name, e] : m) out.insert(name);
  return out;
}

unsigned Poly::degree_in(const std::string& atom) const {
  unsigned d = 0;
  for (const auto& [m, c] : terms_)
    for (const auto& [name, e] : m)
      if (name == atom) d = std::max(d, e);
  return d;
}

unsigned Poly::total_degree() const {
  unsigned d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, mono_degree(m));
  return d;
}

Poly Poly::coefficient_in(const std::string& atom, unsigned k) const {
  Poly out;
  for (const auto& [m, c] : terms_) {
    unsigned e = 0;
    Monomial rest;
    for (const auto& pe : m) {
      if (pe.first == atom) e = pe.second;
      else rest.push_back(pe);
    }
    if (e == k) out.add_term(rest, c);
  }
  return out;
}

std::pair<Monomial, Rational> Poly::leading() const {
  auto best = terms_.begin();
  for (auto it = terms_.begin(); it != terms_.end(); ++it)
    if (lex_greater(it->first, best->first)) best = it;
  return *best;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, fresh] = terms_.emplace(m, c);
  if (fresh) return;
  it->second += c;
  if (it->second == 0) terms_.erase(it);
}

Poly Poly::operator-() const { return scaled(-1); }

Poly operator+(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b.terms_) out.add_term(m, c);
  return out;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b.terms_) out.add_term(m, -c);
  return out;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) out.add_term(mono_mul(ma, mb), ca * cb);
  return out;
}

Poly Poly::scaled(const Rational& c) const {
  Poly out;
  if (c == 0) return out;
  for (const auto& [m, v] : terms_) out.terms_.emplace(m, v * c);
  return out;
}

Poly Poly::pow(unsigned e) const {
  Poly result = constant(1), base = *this;
  while (e) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

Poly Poly::derivative(const std::string& atom) const {
  Poly out;
  for (const auto& [m, c] : terms_) {
    Monomial d;
    unsigned e = 0;
    for (const auto& pe : m) {
      if (pe.first != atom) d.push_back(pe);
      else if ((e = pe.second) > 1) d.emplace_back(atom, e - 1);
    }
    if (e) out.add_term(d, c * e);
  }
  return out;
}

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
  if (b.is_zero()) return std::nullopt;
  const auto [mb, cb] = b.leading();
  Poly q, r = a;
  while (!r.is_zero()) {
    const auto [mr, cr] = r.leading();
    auto m = mono_div(mr, mb);
    if (!m) return std::nullopt;
    Poly t = Poly::monomial(*m, cr / cb);
    q = q + t;
    r = r - t * b;
  }
  return q;
}

Poly gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  if (a.is_constant() || b.is_constant()) return Poly::constant(1);
  std::set<std::string> vars = a.atoms();
  for (const auto& v : b.atoms()) vars.insert(v);
  const std::string x = *vars.begin();
  if (a.degree_in(x) == 0) return gcd(a, content_in(b, x));
  if (b.degree_in(x) == 0) return gcd(content_in(a, x), b);

  const Poly c = gcd(content_in(a, x), content_in(b, x));
  Poly p = primitive_in(a, x), q = primitive_in(b, x);
  if (p.degree_in(x) < q.degree_in(x)) std::swap(p, q);
  while (!q.is_zero()) {
    Poly r = pseudo_remainder(p, q, x);
    p = std::move(q);
    q = r.is_zero() ? r : primitive_in(r, x);
  }
  return monic(c * primitive_in(p, x));
}

namespace {

NormalForm make(Poly num, Poly den, std::map<std::string, Term> atoms, const std::function<std::string()>& site) {
  if (den.is_zero()) throw DivisionByZero(site());
  NormalForm nf;
  if (num.is_zero()) return nf;
  if (!den.is_constant()) {
    Poly g = gcd(num, den);
    if (!g.is_constant()) {
      num = *divide_exact(num, g);
      den = *divide_exact(den, g);
    }
  }
  const Rational c = den.leading().second;
  nf.num = num.scaled(1 / c);
  nf.den = den.scaled(1 / c);
  if (nf.num.total_degree() > kMaxDegree || nf.den.total_degree() > kMaxDegree)
    throw UnsupportedTerm("degree exceeds " + std::to_string(kMaxDegree) + " in " + site());
  // Keep only atoms still present.
  std::set<std::string> used = nf.num.atoms();
  for (const auto& a : nf.den.atoms()) used.insert(a);
  for (auto& [key, term] : atoms)
    if (used.count(key)) nf.atoms.emplace(key, std::move(term));
  return nf;
}

std::map<std::string, Term> merge_atoms(const NormalForm& a, const NormalForm& b) {
  auto out = a.atoms;
  out.insert(b.atoms.begin(), b.atoms.end());
  return out;
}

NormalForm normalize_rec(const Term& t) {
  auto site = [&] { return print_term(t); };
  switch (t.kind()) {
    case TermKind::Literal: return make(Poly::constant(t.value()), Poly::constant(1), {}, site);
    case TermKind::Variable: return make(Poly::atom(t.name()), Poly::constant(1), {}, site);
    case TermKind::Apply: {
      std::vector<Term> args;
      std::string key = t.name() + "(";
      for (const auto& a : t.args()) {
        args.push_back(to_term(normalize_rec(a)));
        key += (args.size() > 1 ? ", " : "") + print_term(args.back());
      }
      key += ")";
      return make(Poly::atom(key), Poly::constant(1), {{key, Term::apply(t.name(), std::move(args))}}, site);
    }
    case TermKind::Neg: {
      NormalForm a = normalize_rec(t.args()[0]);
      a.num = -a.num;
      return a;
    }
    case TermKind::Add:
    case TermKind::Sub: {
      NormalForm a = normalize_rec(t.lhs()), b = normalize_rec(t.rhs());
      Poly bn = t.kind() == TermKind::Add ? b.num : -b.num;
      if (a.den == b.den) return make(a.num + bn, a.den, merge_atoms(a, b), site);
      return make(a.num * b.den + bn * a.den, a.den * b.den, merge_atoms(a, b), site);
    }
    case TermKind::Mul: {
      NormalForm a = normalize_rec(t.lhs()), b = normalize_rec(t.rhs());
      return make(a.num * b.num, a.den * b.den, merge_atoms(a, b), site);
    }
    case TermKind::Div: {
      NormalForm a = normalize_rec(t.lhs()), b = normalize_rec(t.rhs());
      return make(a.num * b.den, a.den * b.num, merge_atoms(a, b), site);
    }
    case TermKind::Pow: {
      NormalForm base = normalize_rec(t.lhs());
      if (t.rhs().is_variable()) {
        const Term b = to_term(base);
        const Term opaque = Term::pow(b, t.rhs());
        if (b.is_literal() && b.value() == 1) return base;
        const std::string key = print_term(opaque);
        return make(Poly::atom(key), Poly::constant(1), {{key, opaque}}, site);
      }
      const Rational e = t.rhs().value();
      if (!is_integer(e)) throw NonIntegerExponent("exponent of " + site() + " is not an integer");
      if (abs(e) > kMaxDegree) throw UnsupportedTerm("exponent too large in " + site());
      const long k = numerator_of(e).convert_to<long>();
      const auto n = static_cast<unsigned>(k < 0 ? -k : k);
      if (k >= 0) return make(base.num.pow(n), base.den.pow(n), base.atoms, site);
      return make(base.den.pow(n), base.num.pow(n), base.atoms, site);
    }
  }
  throw UnsupportedTerm("unknown term " + site());
}

Term atom_term(const std::string& key, const NormalForm& nf) {
  auto it = nf.atoms.find(key);
  return it == nf.atoms.end() ? Term::variable(key) : it->second;
}

// Graded order for printing: higher total degree first, then lexicographic.
Term poly_term(const Poly& p, const NormalForm& nf) {
  std::vector<std::pair<Monomial, Rational>> ts(p.terms().begin(), p.terms().end());
  std::stable_sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) {
    const unsigned da = mono_degree(a.first), db = mono_degree(b.first);
    if (da != db) return da > db;
    return lex_greater(a.first, b.first);
  });
  std::optional<Term> out;
  for (const auto& [m, c] : ts) {
    std::optional<Term> mono;
    for (const auto& [name, e] : m) {
      Term f = atom_term(name, nf);
      if (e > 1) f = Term::pow(f, Term::literal(static_cast<long>(e)));
      mono = mono ? Term::mul(*mono, f) : f;
    }
    const Rational mag = abs(c);
    Term piece = !mono ? Term::literal(mag) : mag == 1 ? *mono : Term::mul(Term::literal(mag), *mono);
    if (!out) out = c < 0 ? Term::neg(piece) : piece;
    else out = c < 0 ? Term::sub(*out, piece) : Term::add(*out, piece);
  }
  return out ? *out : Term::literal(0);
}

}  // namespace

NormalForm normalize(const Term& t) { return normalize_rec(t); }

Term to_term(const NormalForm& nf) {
  Term num = poly_term(nf.num, nf);
  if (nf.den == Poly::constant(1)) return num;
  return Term::div(num, poly_term(nf.den, nf));
}

nlohmann::json to_json(const NormalForm& nf) {
  return {{"numerator", print_term(poly_term(nf.num, nf))}, {"denominator", print_term(poly_term(nf.den, nf))}};
}

std::string_view verdict_name(EquivVerdict::Kind k) {
  switch (k) {
    case EquivVerdict::Kind::Equal: return "Equal";
    case EquivVerdict::Kind::NotEqual: return "NotEqual";
    case EquivVerdict::Kind::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

// Evaluates under a sample point, inventing function values on demand so that
// equal arguments always give equal values.
class Sampler {
 public:
  Sampler(std::mt19937_64& rng, Valuation& point) : rng_(rng), point_(point) {}

  Rational eval(const Term& t) {
    switch (t.kind()) {
      case TermKind::Apply: {
        FunctionKey key{t.name(), {}};
        for (const auto& a : t.args()) key.second.push_back(eval(a));
        auto [it, fresh] = point_.functions.emplace(key, 0);
        if (fresh) it->second = std::uniform_int_distribution<long>(-1000, 1000)(rng_);
        return it->second;
      }
      case TermKind::Literal: return t.value();
      case TermKind::Variable: {
        auto it = point_.vars.find(t.name());
        if (it == point_.vars.end()) throw UnboundVariable(t.name());
        return it->second;
      }
      case TermKind::Neg: return -eval(t.args()[0]);
      case TermKind::Add: return eval(t.lhs()) + eval(t.rhs());
      case TermKind::Sub: return eval(t.lhs()) - eval(t.rhs());
      case TermKind::Mul: return eval(t.lhs()) * eval(t.rhs());
      case TermKind::Div: {
        Rational d = eval(t.rhs());
        if (d == 0) throw DivisionByZero(print_term(t));
        return eval(t.lhs()) / d;
      }
      case TermKind::Pow: {
        Rational b = eval(t.lhs()), e = eval(t.rhs());
        if (!is_integer(e)) throw NonIntegerExponent(print_term(t));
        if (abs(e) > 256) throw NotEvaluable(print_term(t));
        return pow(b, numerator_of(e).convert_to<long>());
      }
    }
    throw NotEvaluable(print_term(t));
  }

 private:
  std::mt19937_64& rng_;
  Valuation& point_;
};

void exponent_variables(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Pow && t.rhs().is_variable()) out.insert(t.rhs().name());
  for (const auto& a : t.args()) exponent_variables(a, out);
}

}  // namespace

EquivVerdict equiv(const Term& a, const Term& b, const EquivOptions& options) {
  EquivVerdict v;
  std::string why_unknown;
  try {
    if (normalize(a) == normalize(b)) {
      v.kind = EquivVerdict::Kind::Equal;
      return v;
    }
  } catch (const Error& e) {
    why_unknown = std::string("normalization failed: ") + e.what();
  }

  std::set<std::string> vars = free_variables(a);
  for (const auto& x : free_variables(b)) vars.insert(x);
  std::set<std::string> exps;
  exponent_variables(a, exps);
  exponent_variables(b, exps);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<long> num(-options.bound, options.bound), den(1, options.bound),
      small_exp(-3, 6);
  static constexpr long kSmall[] = {0, 1, -1, 2, -2, 3, -3};
  constexpr int kSmallCount = 7;
  for (int s = 0; s < options.samples; ++s) {
    Valuation point;
    int i = 0;
    for (const auto& x : vars) {
      Rational value;
      if (s < kSmallCount) value = kSmall[(s + i) % kSmallCount];
      else if (exps.count(x)) value = small_exp(rng);
      else value = Rational(num(rng), den(rng));
      point.vars[x] = value;
      ++i;
    }
    try {
      Sampler sampler(rng, point);
      Rational va = sampler.eval(a), vb = sampler.eval(b);
      if (va == vb) continue;
      v.kind = EquivVerdict::Kind::NotEqual;
      v.witness = std::move(point);
      v.lhs_value = va;
      v.rhs_value = vb;
      return v;
    } catch (const Error&) {
      continue;
    }
  }
  v.kind = EquivVerdict::Kind::Unknown;
  v.reason = !why_unknown.empty() ? why_unknown
                                  : "no separating point in " + std::to_string(options.samples) + " samples";
  return v;
}

namespace {

Integer isqrt(const Integer& n) { return boost::multiprecision::sqrt(n); }

// n = s^2 * f with f square-free (trial division up to 10^6, then a perfect-square check).
std::pair<Integer, Integer> split_square(Integer n) {
  Integer s = 1, f = 1;
  for (long p = 2; p <= 1000000 && Integer(p) * p <= n; ++p) {
    while (n % (p * p) == 0) n /= p * p, s *= p;
    if (n % p == 0) n /= p, f *= p;
  }
  Integer r = isqrt(n);
  if (r * r == n) s *= r;
  else f *= n;
  return {s, f};
}

std::vector<Integer> divisors(Integer n) {
  n = abs(n);
  std::vector<Integer> out;
  for (Integer d = 1; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  return out;
}

Rational horner(const std::vector<Rational>& c, const Rational& x) {
  Rational r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

std::vector<Rational> deflate(const std::vector<Rational>& c, const Rational& root) {
  std::vector<Rational> q(c.size() - 1);
  Rational carry = 0;
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    carry = carry * root + c[i + 1];
    q[i] = carry;
  }
  return q;
}

void quadratic_roots(const std::vector<Rational>& c, std::vector<Root>& out) {
  if (c.size() == 2) {
    out.push_back({-c[0] / c[1]});
    return;
  }
  const Rational& A = c[2];
  const Rational& B = c[1];
  const Rational& C = c[0];
  const Rational disc = B * B - 4 * A * C;
  const Rational centre = -B / (2 * A);
  if (disc < 0) return;
  if (disc == 0) {
    out.push_back({centre});
    return;
  }
  // sqrt(p/q) = sqrt(p*q)/q
  const Integer p = numerator_of(disc), q = denominator_of(disc);
  auto [s, f] = split_square(p * q);
  const Rational scale = Rational(s, q) / (2 * A);
  if (f == 1) {
    out.push_back({centre - abs(scale)});
    out.push_back({centre + abs(scale)});
  } else {
    out.push_back({centre, -abs(scale), f});
    out.push_back({centre, abs(scale), f});
  }
}

constexpr long kMaxRootSearch = 1000000000000L;

}  // namespace

double Root::approx() const {
  return to_double(a) + (b == 0 ? 0.0 : to_double(b) * std::sqrt(d.convert_to<double>()));
}

std::string Root::to_string() const {
  if (b == 0) return mathcheck::to_string(a);
  std::string radical = "sqrt(" + d.str() + ")";
  std::string rb = abs(b) == 1 ? radical : mathcheck::to_string(abs(b)) + "*" + radical;
  if (a == 0) return (b < 0 ? "-" : "") + rb;
  return mathcheck::to_string(a) + (b < 0 ? " - " : " + ") + rb;
}

std::vector<Root> solve_univariate(const Term& lhs, const Term& rhs, const std::string& v) {
  NormalForm nf = normalize(Term::sub(lhs, rhs));
  for (const auto& atom : nf.num.atoms())
    if (atom != v) throw NotUnivariate("equation involves " + atom + " besides " + v);
  for (const auto& atom : nf.den.atoms())
    if (atom != v) throw NotUnivariate("equation involves " + atom + " besides " + v);
  if (nf.num.is_zero()) throw Error("the equation holds for every " + v);

  const unsigned degree = nf.num.degree_in(v);
  if (degree > 4) throw DegreeTooHigh("degree " + std::to_string(degree) + " exceeds 4");
  std::vector<Rational> c(degree + 1);
  for (unsigned k = 0; k <= degree; ++k) c[k] = nf.num.coefficient(k ? Monomial{{v, k}} : Monomial{});

  std::vector<Root> roots;
  if (degree == 0) return roots;
  while (c.size() > 1 && c[0] == 0) {
    roots.push_back({0});
    c.erase(c.begin());
  }
  if (c.size() > 3) {
    Integer lcm = 1;
    for (const auto& x : c) lcm = boost::multiprecision::lcm(lcm, denominator_of(x));
    std::vector<Integer> ic;
    for (const auto& x : c) ic.push_back(numerator_of(x * lcm));
    if (abs(ic.front()) > kMaxRootSearch || abs(ic.back()) > kMaxRootSearch)
      throw DegreeTooHigh("coefficients too large for a rational root search");
    const auto ps = divisors(ic.front()), qs = divisors(ic.back());
    std::set<Rational> candidates;
    for (const auto& p : ps)
      for (const auto& q : qs) candidates.insert(Rational(p, q)), candidates.insert(Rational(-p, q));
    for (const auto& r : candidates) {
      while (c.size() > 1 && horner(c, r) == 0) {
        roots.push_back({r});
        c = deflate(c, r);
      }
    }
    if (c.size() > 3) throw DegreeTooHigh("no rational roots reduce the degree to 2");
  }
  if (c.size() > 1) quadratic_roots(c, roots);

  std::vector<Root> kept;
  for (const auto& r : roots) {
    if (std::find(kept.begin(), kept.end(), r) != kept.end()) continue;
    if (r.is_rational() && !nf.den.is_constant()) {
      Valuation at;
      at.vars[v] = r.a;
      if (eval_exact(to_term(NormalForm{nf.den, Poly::constant(1), nf.atoms}), at) == 0) continue;
    }
    kept.push_back(r);
  }
  std::sort(kept.begin(), kept.end(), [](const Root& x, const Root& y) { return x.approx() < y.approx(); });
  return kept;
}

Term differentiate(const Term& t, const std::string& v) {
  NormalForm nf = normalize(t);
  for (const auto& [key, term] : nf.atoms)
    if (free_variables(term).count(v))
      throw UnsupportedTerm("cannot differentiate " + print_term(term) + " with respect to " + v);
  Poly num = nf.num.derivative(v) * nf.den - nf.num * nf.den.derivative(v);
  Poly den = nf.den * nf.den;
  return to_term(make(num, den, nf.atoms, [&] { return print_term(t); }));
}

}  // namespace mathcheck
