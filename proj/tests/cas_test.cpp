#include "mathcheck/cas.hpp"
#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include "cas_gen.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mathcheck;

namespace {

Term T(const std::string& s) { return parse_term(s); }

using Env = std::map<std::string, Rational>;

Env random_point(std::mt19937_64& rng, const std::set<std::string>& vars) {
  std::uniform_int_distribution<long> num(-50, 50), den(1, 7);
  Env env;
  for (const auto& v : vars) env[v] = Rational(num(rng), den(rng));
  return env;
}

std::set<std::string> vars_of(const Term& a, const Term& b) {
  auto v = free_variables(a);
  for (const auto& x : free_variables(b)) v.insert(x);
  return v;
}

// Value agreement at `n` random points where both sides are defined.
bool agree_by_sampling(const Term& a, const Term& b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto vars = vars_of(a, b);
  for (int i = 0, tries = 0; i < n && tries < 20 * n; ++tries) {
    Env env = random_point(rng, vars);
    try {
      if (oracle::eval(a, env) != oracle::eval(b, env)) return false;
      ++i;
    } catch (const oracle::Undefined&) {
    }
  }
  return true;
}

Rational rel_error(const Rational& a, const Rational& b) {
  Rational scale = abs(b) > 1 ? Rational(abs(b)) : Rational(1);
  return abs(a - b) / scale;
}

}  // namespace

TEST(Cas, EvalExact) {
  Valuation at;
  at.vars["x"] = 3;
  EXPECT_EQ(eval_exact(T("(x + 1)^2"), at), 16);
  at.vars["x"] = 1;
  EXPECT_THROW(eval_exact(T("1 / (x - 1)"), at), DivisionByZero);
  EXPECT_THROW(eval_exact(T("y + 1"), at), UnboundVariable);
  at.vars["n"] = Rational(1, 2);
  EXPECT_THROW(eval_exact(T("x ^ n"), at), NonIntegerExponent);
}

TEST(Cas, EvalUnfoldsFibonacci) {
  Definition fib = parse_definition(
      "definition(f): NN -> NN f(n) := 0 if n = 0 | 1 if n = 1 | f(n - 1) + f(n - 2) if n > 1");
  Valuation at;
  at.vars["n"] = 4;
  at.functions[{"f", {2}}] = 1;
  at.functions[{"f", {3}}] = 2;
  EXPECT_EQ(eval_exact(T("f(n - 1) + f(n - 2)"), at, std::span(&fib, 1)), 3);
  // Hand unfolding of the recurrence: 0, 1, 1, 2, 3, 5, 8, 13.
  Valuation none;
  EXPECT_EQ(eval_exact(T("f(7)"), none, std::span(&fib, 1)), 13);
}

TEST(Cas, NormalizeExpandsBinomial) {
  NormalForm nf = normalize(T("(x + 1)^2"));
  EXPECT_TRUE(nf.is_polynomial());
  EXPECT_EQ(nf.num.terms().size(), 3u);
  EXPECT_EQ(nf.num.coefficient({{"x", 2}}), 1);
  EXPECT_EQ(nf.num.coefficient({{"x", 1}}), 2);
  EXPECT_EQ(nf.num.coefficient({}), 1);
}

TEST(Cas, NormalizeCancelsCommonFactor) {
  NormalForm nf = normalize(T("(x^2 - 1) / (x - 1)"));
  EXPECT_EQ(nf.num, normalize(T("x + 1")).num);
  EXPECT_EQ(nf.den, Poly::constant(1));
  EXPECT_EQ(print_term(to_term(nf)), "x + 1");

  NormalForm two = normalize(T("(x^2*y - y^3) / (x*y + y^2)"));
  EXPECT_EQ(two, normalize(T("x - y")));
  NormalForm three = normalize(T("(x*y + x*z) / (2*y + 2*z)"));
  EXPECT_EQ(three, normalize(T("x / 2")));
  EXPECT_THROW(normalize(T("x / (y - y)")), DivisionByZero);
}

TEST(Cas, MultivariateGcd) {
  Poly a = normalize(T("(x + y)^2 * (x - 2*z)")).num;
  Poly b = normalize(T("(x + y) * (x - 2*z)^3 * (y + 1)")).num;
  Poly g = gcd(a, b);
  EXPECT_EQ(g, normalize(T("(x + y) * (x - 2*z)")).num);
  EXPECT_TRUE(divide_exact(a, g).has_value());
  EXPECT_TRUE(divide_exact(b, g).has_value());
  EXPECT_FALSE(divide_exact(normalize(T("x^2 + 1")).num, normalize(T("x + 1")).num).has_value());
}

TEST(Cas, NormalFormAgreesWithEvaluation) {
  casgen::Generator gen(11);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    Term t = gen.poly(2, 3);
    Term back = to_term(normalize(t));
    EXPECT_TRUE(agree_by_sampling(t, back, 25, rng())) << print_term(t) << "  vs  " << print_term(back);
  }
}

TEST(Cas, NormalizeIsIdempotent) {
  casgen::Generator gen(3);
  for (int i = 0; i < 60; ++i) {
    Term t = gen.rewrite(gen.poly(3, 3));
    NormalForm nf = normalize(t);
    Term printed = parse_term(print_term(to_term(nf)));
    EXPECT_EQ(normalize(printed), nf) << print_term(t);
  }
}

TEST(Cas, EquivBasics) {
  EXPECT_EQ(equiv(T("(x + 1)^2"), T("x^2 + 2*x + 1")).kind, EquivVerdict::Kind::Equal);
  EquivVerdict v = equiv(T("(x + 1)^2"), T("x^2 + 1"));
  ASSERT_EQ(v.kind, EquivVerdict::Kind::NotEqual);
  EXPECT_EQ(v.witness.vars.at("x"), 1);
  EXPECT_EQ(v.lhs_value, 4);
  EXPECT_EQ(v.rhs_value, 2);
  EXPECT_EQ(equiv(T("g(x) + 0"), T("g(x)")).kind, EquivVerdict::Kind::Equal);
  EXPECT_EQ(equiv(T("g(x + 1) * 2"), T("g(1 + x) + g(x + 1)")).kind, EquivVerdict::Kind::Equal);
}

TEST(Cas, EquivOpaqueWitnessesAreConsistent) {
  EquivVerdict v = equiv(T("g(x) * g(x)"), T("g(x)"));
  ASSERT_EQ(v.kind, EquivVerdict::Kind::NotEqual);
  EXPECT_EQ(eval_exact(T("g(x) * g(x)"), v.witness), v.lhs_value);
  EXPECT_EQ(eval_exact(T("g(x)"), v.witness), v.rhs_value);
}

TEST(Cas, EquivVariableExponent) {
  EXPECT_EQ(equiv(T("x^n * x^n"), T("(x^n)^2")).kind, EquivVerdict::Kind::Equal);
  EquivVerdict v = equiv(T("2^n"), T("n + 1"));
  ASSERT_EQ(v.kind, EquivVerdict::Kind::NotEqual);
  EXPECT_NE(eval_exact(T("2^n"), v.witness), eval_exact(T("n + 1"), v.witness));
  // True identity the normal form cannot see: sampling finds no counterexample.
  EXPECT_EQ(equiv(T("x * x^n"), T("x^n * x")).kind, EquivVerdict::Kind::Equal);
}

TEST(Cas, EquivSoundnessOnRandomPairs) {
  casgen::Generator gen(99);
  int equal = 0, unequal = 0;
  for (int i = 0; i < 150; ++i) {
    const std::size_t nv = 1 + i % 3;
    Term a = gen.poly(nv, 1 + i % 4);
    Term b = gen.rewrite(a);
    if (i % 2) b = Term::add(b, gen.perturbation(nv, 2));
    EquivVerdict v = equiv(a, b, {.seed = static_cast<std::uint64_t>(i)});
    if (v.kind == EquivVerdict::Kind::Equal) {
      ++equal;
      EXPECT_TRUE(agree_by_sampling(a, b, 100, 1000 + i)) << print_term(a) << " vs " << print_term(b);
    } else if (v.kind == EquivVerdict::Kind::NotEqual) {
      ++unequal;
      Env env(v.witness.vars.begin(), v.witness.vars.end());
      EXPECT_NE(oracle::eval(a, env), oracle::eval(b, env));
      EXPECT_EQ(oracle::eval(a, env), v.lhs_value);
    }
  }
  EXPECT_GT(equal, 50);
  EXPECT_GT(unequal, 50);
}

TEST(Cas, SolveUnivariate) {
  auto roots = solve_univariate(T("x^2 - 5*x + 6"), T("0"), "x");
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_EQ(roots[0], Root{2});
  EXPECT_EQ(roots[1], Root{3});

  roots = solve_univariate(T("2*x + 1"), T("0"), "x");
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0].a, Rational(-1, 2));

  roots = solve_univariate(T("x^2 - 2"), T("0"), "x");
  ASSERT_EQ(roots.size(), 2u);
  for (const auto& r : roots) {
    EXPECT_FALSE(r.is_rational());
    // (a + b sqrt d)^2 = a^2 + b^2 d + 2ab sqrt d must equal 2.
    EXPECT_EQ(r.a * r.a + r.b * r.b * Rational(r.d), 2);
    EXPECT_EQ(r.a * r.b, 0);
  }
  EXPECT_EQ(roots[0].to_string(), "-sqrt(2)");
  EXPECT_EQ(roots[1].to_string(), "sqrt(2)");

  EXPECT_TRUE(solve_univariate(T("x^2 + 1"), T("0"), "x").empty());
  EXPECT_THROW(solve_univariate(T("x^5"), T("1"), "x"), DegreeTooHigh);
  EXPECT_THROW(solve_univariate(T("x + y"), T("0"), "x"), NotUnivariate);
}

TEST(Cas, SolveQuarticByRationalRoots) {
  EXPECT_THROW(solve_univariate(T("(x - 1)*(x + 2)*(2*x - 3)*(x^2 - 3)"), T("0"), "x"), DegreeTooHigh);
  auto roots = solve_univariate(T("(x - 1)*(x + 2)*(x^2 - 3)"), T("0"), "x");
  ASSERT_EQ(roots.size(), 4u);
  EXPECT_EQ(roots[0], Root{-2});
  EXPECT_EQ(roots[2], Root{1});
  EXPECT_EQ(roots[1].to_string(), "-sqrt(3)");
  EXPECT_THROW(solve_univariate(T("x^4 + x + 1"), T("0"), "x"), DegreeTooHigh);
  // A root of the numerator that kills the denominator is not a solution.
  roots = solve_univariate(T("(x^2 - 1) / (x - 1)"), T("0"), "x");
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0], Root{-1});
}

TEST(Cas, RootsSubstituteBack) {
  casgen::Generator gen(5);
  for (int i = 0; i < 40; ++i) {
    Term lhs = gen.poly(1, 2 + i % 3);
    std::vector<Root> roots;
    try {
      roots = solve_univariate(lhs, T("0"), "x");
    } catch (const DegreeTooHigh&) {
      continue;
    } catch (const Error&) {
      continue;
    }
    for (const auto& r : roots) {
      if (!r.is_rational()) continue;
      EXPECT_EQ(oracle::eval(lhs, {{"x", r.a}}), 0) << print_term(lhs) << " at " << r.to_string();
    }
  }
}

TEST(Cas, Differentiate) {
  EXPECT_EQ(normalize(differentiate(T("x^3"), "x")), normalize(T("3*x^2")));
  EXPECT_EQ(print_term(differentiate(T("x^3"), "x")), "3 * x^2");
  EXPECT_EQ(print_term(differentiate(T("5 + y"), "x")), "0");
  EXPECT_EQ(normalize(differentiate(T("1 / x"), "x")), normalize(T("-1 / x^2")));
  EXPECT_THROW(differentiate(T("g(x)"), "x"), UnsupportedTerm);
  EXPECT_EQ(print_term(differentiate(T("g(y) * x"), "x")), "g(y)");
}

TEST(Cas, DerivativeMatchesFiniteDifference) {
  casgen::Generator gen(17);
  std::mt19937_64 rng(18);
  const Rational h(1, 100000);
  for (int i = 0; i < 20; ++i) {
    Term f = gen.poly(1, 4);
    Term df = differentiate(f, "x");
    for (int k = 0; k < 10; ++k) {
      Rational x0(std::uniform_int_distribution<long>(-300, 300)(rng), 100);
      Rational central = (oracle::eval(f, {{"x", x0 + h}}) - oracle::eval(f, {{"x", x0 - h}})) / (2 * h);
      Rational exact = oracle::eval(df, {{"x", x0}});
      EXPECT_LE(rel_error(exact, central), Rational(1, 1000000)) << print_term(f);
    }
  }
}

TEST(Cas, DerivativeIsLinear) {
  casgen::Generator gen(23);
  for (int i = 0; i < 20; ++i) {
    Term f = gen.poly(2, 3), g = gen.poly(2, 3);
    Rational a(gen.pick(-5, 5), gen.pick(1, 4)), b(gen.pick(-5, 5), gen.pick(1, 4));
    Term combo = Term::add(Term::mul(Term::literal(a), f), Term::mul(Term::literal(b), g));
    Term rhs = Term::add(Term::mul(Term::literal(a), differentiate(f, "x")),
                         Term::mul(Term::literal(b), differentiate(g, "x")));
    EXPECT_EQ(normalize(differentiate(combo, "x")), normalize(rhs));
  }
}
