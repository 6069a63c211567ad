#pragma once

// Test-only reference evaluators. Deliberately naive and independent of the
// library's evaluation, normalisation and solver paths.

#include "mathcheck/ast.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using mathcheck::Formula;
using mathcheck::FormulaKind;
using mathcheck::Rational;
using mathcheck::Term;
using mathcheck::TermKind;

// Function interpretation: name, argument values -> value (nullopt = undefined).
using FunctionTable = std::function<std::optional<Rational>(const std::string&, const std::vector<Rational>&)>;

struct Undefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rational eval(const Term& t, const std::map<std::string, Rational>& env, const FunctionTable& fns = {}) {
  switch (t.kind()) {
    case TermKind::Literal: return t.value();
    case TermKind::Variable: {
      auto it = env.find(t.name());
      if (it == env.end()) throw Undefined("unbound " + t.name());
      return it->second;
    }
    case TermKind::Apply: {
      std::vector<Rational> args;
      for (const auto& a : t.args()) args.push_back(eval(a, env, fns));
      if (!fns) throw Undefined("no function table");
      auto v = fns(t.name(), args);
      if (!v) throw Undefined("undefined application");
      return *v;
    }
    case TermKind::Neg: return -eval(t.args()[0], env, fns);
    case TermKind::Add: return eval(t.lhs(), env, fns) + eval(t.rhs(), env, fns);
    case TermKind::Sub: return eval(t.lhs(), env, fns) - eval(t.rhs(), env, fns);
    case TermKind::Mul: return eval(t.lhs(), env, fns) * eval(t.rhs(), env, fns);
    case TermKind::Div: {
      Rational d = eval(t.rhs(), env, fns);
      if (d == 0) throw Undefined("division by zero");
      return eval(t.lhs(), env, fns) / d;
    }
    case TermKind::Pow: {
      Rational b = eval(t.lhs(), env, fns);
      Rational e = eval(t.rhs(), env, fns);
      if (mathcheck::denominator_of(e) != 1) throw Undefined("fractional exponent");
      long k = mathcheck::numerator_of(e).convert_to<long>();
      Rational r = 1;
      for (long i = 0; i < (k < 0 ? -k : k); ++i) r *= b;
      if (k < 0) {
        if (r == 0) throw Undefined("division by zero");
        r = Rational(1) / r;
      }
      return r;
    }
  }
  throw Undefined("bad term");
}

// Quantifiers range over the integers in [lo, hi] (restricted further by sort).
inline bool holds(const Formula& f, std::map<std::string, Rational> env, const FunctionTable& fns = {},
                  long lo = -8, long hi = 8) {
  switch (f.kind()) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Compare: {
      Rational a = eval(f.terms()[0], env, fns), b = eval(f.terms()[1], env, fns);
      switch (f.rel()) {
        case mathcheck::Rel::Eq: return a == b;
        case mathcheck::Rel::Ne: return a != b;
        case mathcheck::Rel::Lt: return a < b;
        case mathcheck::Rel::Le: return a <= b;
        case mathcheck::Rel::Gt: return a > b;
        case mathcheck::Rel::Ge: return a >= b;
      }
      return false;
    }
    case FormulaKind::Member: {
      Rational v = eval(f.terms()[0], env, fns);
      switch (f.sort()) {
        case mathcheck::Sort::Nat: return mathcheck::is_integer(v) && v >= 0;
        case mathcheck::Sort::Int: return mathcheck::is_integer(v);
        default: return true;
      }
    }
    case FormulaKind::Not: return !holds(f.subs()[0], env, fns, lo, hi);
    case FormulaKind::And: return holds(f.subs()[0], env, fns, lo, hi) && holds(f.subs()[1], env, fns, lo, hi);
    case FormulaKind::Or: return holds(f.subs()[0], env, fns, lo, hi) || holds(f.subs()[1], env, fns, lo, hi);
    case FormulaKind::Implies: return !holds(f.subs()[0], env, fns, lo, hi) || holds(f.subs()[1], env, fns, lo, hi);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      const bool all = f.kind() == FormulaKind::Forall;
      for (long v = lo; v <= hi; ++v) {
        env[f.var()] = v;
        if (holds(f.body(), env, fns, lo, hi) != all) return !all;
      }
      return all;
    }
  }
  return false;
}

}  // namespace oracle
