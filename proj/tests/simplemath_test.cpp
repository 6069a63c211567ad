#include "mathcheck/ast.hpp"
#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace mathcheck {
namespace {

const char* kFibonacci =
    "definition(f): NN -> NN\n"
    "f(n) := f(n-1) + f(n-2), if n >= 3;\n"
    "     | 1, if n = 2;\n"
    "     | 1, if n = 1;";

Term var(const char* n) { return Term::variable(n); }
Term lit(long v) { return Term::literal(v); }

TEST(ParseFormula, QuantifiedRecurrence) {
  Formula f = parse_formula("forall n, n in NN -> f(n) = f(n-1) + f(n-2)");
  ASSERT_EQ(f.kind(), FormulaKind::Forall);
  EXPECT_EQ(f.var(), "n");
  EXPECT_EQ(f.sort(), Sort::Nat);
  const Formula& body = f.body();
  ASSERT_EQ(body.kind(), FormulaKind::Implies);
  EXPECT_EQ(body.subs()[0], Formula::member(var("n"), Sort::Nat));
  const Term fn = Term::apply("f", {var("n")});
  const Term rhs = Term::add(Term::apply("f", {Term::sub(var("n"), lit(1))}),
                             Term::apply("f", {Term::sub(var("n"), lit(2))}));
  EXPECT_EQ(body.subs()[1], Formula::eq(fn, rhs));
}

TEST(ParseFormula, TrivialIdentity) {
  EXPECT_EQ(parse_formula("1 = 1"), Formula::eq(lit(1), lit(1)));
}

TEST(ParseFormula, MalformedReportsPosition) {
  try {
    parse_formula("x + * 2");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 5u);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(ParseFormula, NeverThrowsAnythingButSyntaxErrors) {
  const char* inputs[] = {"", "(", ")", "forall", "forall x", "x in", "x in QQQ", "f(", "1 =", "((1 = 1)",
                          "x ^ 1.5 = 2", "x^2^3 = 1", "@", "~", "exists x : NN", "1 < 2 3"};
  for (const char* in : inputs) EXPECT_THROW(parse_formula(in), SyntaxError) << in;
}

TEST(ParseFormula, Precedence) {
  // Pow binds tighter than unary minus, which binds tighter than * and /.
  EXPECT_EQ(parse_term("-x^2"), Term::neg(Term::pow(var("x"), lit(2))));
  EXPECT_EQ(parse_term("a - b - c"), Term::sub(Term::sub(var("a"), var("b")), var("c")));
  EXPECT_EQ(parse_term("a / b * c"), Term::mul(Term::div(var("a"), var("b")), var("c")));
  EXPECT_EQ(parse_term("x^(-1)"), Term::pow(var("x"), Term::literal(-1L)));
  EXPECT_EQ(parse_term("0.25"), Term::literal(Rational(1, 4)));

  Formula a = Formula::eq(var("a"), lit(1)), b = Formula::eq(var("b"), lit(1)), c = Formula::eq(var("c"), lit(1));
  EXPECT_EQ(parse_formula("a = 1 -> b = 1 -> c = 1"), Formula::implies(a, Formula::implies(b, c)));
  EXPECT_EQ(parse_formula("a = 1 \\/ b = 1 /\\ c = 1"), Formula::disj(a, Formula::conj(b, c)));
  EXPECT_EQ(parse_formula("~a = 1 /\\ b = 1"), Formula::conj(Formula::negation(a), b));
  EXPECT_EQ(parse_formula("(a = 1 \\/ b = 1) -> c = 1"), Formula::implies(Formula::disj(a, b), c));
  EXPECT_EQ(parse_formula("(a + 1) * 2 = 4"),
            Formula::eq(Term::mul(Term::add(var("a"), lit(1)), lit(2)), lit(4)));
  EXPECT_EQ(parse_formula("((a)) = 1"), a);
}

TEST(PrintFormula, MinimalParentheses) {
  EXPECT_EQ(print_formula(Formula::eq(lit(1), lit(1))), "1 = 1");
  Formula a = parse_formula("a > 0"), b = parse_formula("b > 0"), c = parse_formula("c > 0");
  EXPECT_EQ(print_formula(Formula::implies(a, Formula::implies(b, c))), "a > 0 -> b > 0 -> c > 0");
  EXPECT_EQ(print_formula(Formula::implies(Formula::implies(a, b), c)), "(a > 0 -> b > 0) -> c > 0");
  EXPECT_EQ(print_term(parse_term("(x + 1)^2 - -y")), "(x + 1)^2 - -y");
  EXPECT_EQ(print_term(parse_term("a - (b - c)")), "a - (b - c)");
}

TEST(ParseDefinition, Fibonacci) {
  Definition d = parse_definition(kFibonacci);
  EXPECT_EQ(d.name, "f");
  EXPECT_EQ(d.arg_sorts, std::vector<Sort>{Sort::Nat});
  EXPECT_EQ(d.result, Sort::Nat);
  ASSERT_EQ(d.branches.size(), 3u);
  EXPECT_EQ(d.branches[0].body, parse_term("f(n-1) + f(n-2)"));
  EXPECT_EQ(d.branches[0].guard, parse_formula("n >= 3"));
  EXPECT_EQ(d.branches[1].body, lit(1));
  EXPECT_EQ(d.branches[1].guard, parse_formula("n = 2"));
  EXPECT_EQ(d.branches[2].guard, parse_formula("n = 1"));
}

TEST(ParseDefinition, UnguardedAndErrors) {
  Definition g = parse_definition("definition(g): NN -> NN  g(n) := n");
  ASSERT_EQ(g.branches.size(), 1u);
  EXPECT_EQ(g.branches[0].guard.kind(), FormulaKind::True);

  EXPECT_THROW(parse_definition("definition(h): NN  h(n) := 1"), SyntaxError);
  EXPECT_THROW(parse_definition("definition(h): NN -> NN  h(n) := 1 | h(a, b) := 2"), ArityError);
  EXPECT_THROW(parse_definition("definition(h): NN, NN -> NN  h(n) := 1"), ArityError);
  EXPECT_THROW(parse_definition("definition(h): NN -> NN  h(n) := m"), Error);
  EXPECT_THROW(parse_definition("definition(h): NN -> NN  h(n) := 1 if m > 0"), Error);
}

// Flatten And/Or chains and sort the pieces by printed form.
Formula canonical_guards(const Formula& f) {
  auto flatten = [](auto&& self, const Formula& g, FormulaKind k, std::vector<Formula>& out) -> void {
    if (g.kind() == k) {
      self(self, g.subs()[0], k, out);
      self(self, g.subs()[1], k, out);
    } else {
      out.push_back(canonical_guards(g));
    }
  };
  switch (f.kind()) {
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> parts;
      flatten(flatten, f, f.kind(), parts);
      std::ranges::sort(parts, {}, [](const Formula& p) { return print_formula(p); });
      return f.kind() == FormulaKind::And ? Formula::conj_all(parts) : Formula::disj_all(parts);
    }
    case FormulaKind::Not: return Formula::negation(canonical_guards(f.subs()[0]));
    case FormulaKind::Implies:
      return Formula::implies(canonical_guards(f.subs()[0]), canonical_guards(f.subs()[1]));
    case FormulaKind::Forall: return Formula::forall(f.var(), f.sort(), canonical_guards(f.body()));
    case FormulaKind::Exists: return Formula::exists(f.var(), f.sort(), canonical_guards(f.body()));
    default: return f;
  }
}

TEST(Desugar, FibonacciMatchesFirstOrderReading) {
  Formula expected = parse_formula(
      "forall n, n in NN -> ((n = 1 \\/ n = 2) -> f(n) = 1) /\\ (n >= 3 -> f(n) = f(n-1) + f(n-2))");
  Formula got = desugar_definition(parse_definition(kFibonacci));
  EXPECT_EQ(canonical_guards(got), canonical_guards(expected)) << print_formula(got);
}

TEST(Desugar, SingleUnconditionalBranch) {
  Formula got = desugar_definition(parse_definition("definition(g): NN -> NN  g(n) := n"));
  EXPECT_EQ(got, parse_formula("forall n, n in NN -> g(n) = n"));
}

TEST(Desugar, DisjointGuardsAgreeWithBranchDispatch) {
  Definition d = parse_definition("definition(h): NN -> ZZ  h(n) := 7 if n = 0 | 2*n - 1 if n >= 1");
  Formula axiom = desugar_definition(d);
  // Instantiate the axiom at each n and check that exactly the dispatched value satisfies it.
  for (long n = 0; n <= 5; ++n) {
    const Rational dispatched = n == 0 ? Rational(7) : Rational(2 * n - 1);
    Formula instance = substitute(axiom.body(), "n", lit(n));
    for (long candidate = -3; candidate <= 12; ++candidate) {
      oracle::FunctionTable table = [&](const std::string&, const std::vector<Rational>&) {
        return std::optional<Rational>(candidate);
      };
      EXPECT_EQ(oracle::holds(instance, {}, table), Rational(candidate) == dispatched) << n << " " << candidate;
    }
  }
}

TEST(FreeVariables, Basics) {
  EXPECT_EQ(free_variables(parse_formula("forall n, f(n) = x")), (std::set<std::string>{"x"}));
  EXPECT_TRUE(free_variables(parse_formula("1 = 1")).empty());
  EXPECT_EQ(free_variables(parse_formula("x > 0 /\\ (exists x, x < 0)")), (std::set<std::string>{"x"}));
}

TEST(Substitute, Basics) {
  EXPECT_EQ(substitute(parse_formula("f(n) = 1"), "n", lit(2)), parse_formula("f(2) = 1"));
  Formula bound = parse_formula("forall n, f(n) = n");
  EXPECT_EQ(substitute(bound, "n", lit(5)), bound);
  EXPECT_THROW(substitute(parse_formula("exists y, x < y"), "x", parse_term("y + 1")), CaptureError);
}

// ---- property tests over a structured generator

struct AstGen {
  std::mt19937_64 rng;
  explicit AstGen(std::uint64_t seed) : rng(seed) {}

  long pick(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }
  std::string name() {
    static const char* names[] = {"x", "y", "n", "k", "a1", "b_2"};
    return names[pick(0, 5)];
  }

  Term term(int depth) {
    if (depth <= 0 || pick(0, 3) == 0) {
      switch (pick(0, 2)) {
        case 0: {
          // Non-negative literals: integers or terminating decimals.
          Rational q(pick(0, 40), pick(0, 1) ? 1 : 4);
          return Term::literal(q);
        }
        default: return Term::variable(name());
      }
    }
    switch (pick(0, 7)) {
      case 0: return Term::neg(term(depth - 1));
      case 1: return Term::add(term(depth - 1), term(depth - 1));
      case 2: return Term::sub(term(depth - 1), term(depth - 1));
      case 3: return Term::mul(term(depth - 1), term(depth - 1));
      case 4: return Term::div(term(depth - 1), term(depth - 1));
      case 5: {
        Term e = pick(0, 2) == 0 ? Term::variable(name()) : Term::literal(pick(-3, 4));
        return Term::pow(term(depth - 1), e);
      }
      default: {
        std::vector<Term> args;
        for (long i = 0, n = pick(1, 2); i < n; ++i) args.push_back(term(depth - 1));
        return Term::apply(pick(0, 1) ? "f" : "g", std::move(args));
      }
    }
  }

  Formula formula(int depth) {
    static const Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge};
    if (depth <= 0 || pick(0, 4) == 0) {
      switch (pick(0, 5)) {
        case 0: return Formula::member(term(2), static_cast<Sort>(pick(0, 3)));
        case 1: return pick(0, 1) ? Formula::truth() : Formula::falsity();
        default: return Formula::compare(rels[pick(0, 5)], term(2), term(2));
      }
    }
    switch (pick(0, 5)) {
      case 0: return Formula::negation(formula(depth - 1));
      case 1: return Formula::conj(formula(depth - 1), formula(depth - 1));
      case 2: return Formula::disj(formula(depth - 1), formula(depth - 1));
      case 3: return Formula::implies(formula(depth - 1), formula(depth - 1));
      default: {
        const bool all = pick(0, 1);
        const std::string v = name();
        const Sort s = static_cast<Sort>(pick(0, 3));
        Formula body = formula(depth - 1);
        if (pick(0, 1)) {
          Formula guard = Formula::member(Term::variable(v), s);
          body = all ? Formula::implies(guard, body) : Formula::conj(guard, body);
        }
        return all ? Formula::forall(v, s, body) : Formula::exists(v, s, body);
      }
    }
  }
};

TEST(RoundTrip, ParsePrintIsIdentityOnGeneratedAsts) {
  AstGen gen(20241017);
  for (int i = 0; i < 2000; ++i) {
    Formula f = gen.formula(4);
    const std::string text = print_formula(f);
    Formula back = parse_formula(text);
    ASSERT_EQ(back, f) << text << "\n  reprinted: " << print_formula(back);
    ASSERT_EQ(formula_from_json(to_json(f)), f);
  }
}

TEST(RoundTrip, DesugaredFibonacciReparses) {
  Formula f = desugar_definition(parse_definition(kFibonacci));
  EXPECT_EQ(parse_formula(print_formula(f)), f);
  Definition d = parse_definition(kFibonacci);
  EXPECT_EQ(parse_definition(print_definition(d)), d);
  EXPECT_EQ(definition_from_json(to_json(d)), d);
}

TEST(Substitute, EliminatesVariableWhenReplacementIsFree) {
  AstGen gen(7);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    Formula f = gen.formula(3);
    Term t = gen.term(2);
    const std::string v = gen.name();
    if (free_variables(t).contains(v)) continue;
    try {
      Formula g = substitute(f, v, t);
      EXPECT_FALSE(free_variables(g).contains(v)) << print_formula(g);
      ++checked;
    } catch (const CaptureError&) {
    } catch (const Error&) {
      // compound replacement landing in an exponent
    }
  }
  EXPECT_GT(checked, 500);
}

}  // namespace
}  // namespace mathcheck
