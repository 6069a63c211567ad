#include "mathcheck/eval.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

namespace mathcheck {

namespace {
constexpr std::size_t kMaxDepth = 512;
constexpr std::size_t kMaxCalls = 200000;
constexpr long kMaxExponent = 4096;
}  // namespace

std::string print_function_value(const FunctionKey& key, const Rational& value) {
  std::string s = key.first + "(";
  for (std::size_t i = 0; i < key.second.size(); ++i) {
    if (i) s += ", ";
    s += to_string(key.second[i]);
  }
  return s + ") = " + to_string(value);
}

bool in_sort(const Rational& value, Sort s) {
  switch (s) {
    case Sort::Nat: return is_integer(value) && value >= 0;
    case Sort::Int: return is_integer(value);
    case Sort::Rat:
    case Sort::Real: return true;
  }
  return true;
}

Evaluator::Evaluator(const Valuation& valuation, std::span<const Definition> definitions)
    : valuation_(valuation), definitions_(definitions) {}

Rational Evaluator::eval(const Term& t, const Scope& scope) {
  switch (t.kind()) {
    case TermKind::Literal: return t.value();
    case TermKind::Variable: {
      auto it = scope.find(t.name());
      if (it == scope.end()) throw UnboundVariable(t.name());
      return it->second;
    }
    case TermKind::Apply: {
      std::vector<Rational> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(eval(a, scope));
      return apply(t.name(), args, t);
    }
    case TermKind::Neg: return -eval(t.args()[0], scope);
    case TermKind::Add: return eval(t.lhs(), scope) + eval(t.rhs(), scope);
    case TermKind::Sub: return eval(t.lhs(), scope) - eval(t.rhs(), scope);
    case TermKind::Mul: return eval(t.lhs(), scope) * eval(t.rhs(), scope);
    case TermKind::Div: {
      Rational num = eval(t.lhs(), scope);
      Rational den = eval(t.rhs(), scope);
      if (den == 0) throw DivisionByZero(print_term(t));
      return num / den;
    }
    case TermKind::Pow: {
      Rational base = eval(t.lhs(), scope);
      Rational exponent = eval(t.rhs(), scope);
      if (!is_integer(exponent))
        throw NonIntegerExponent("exponent of " + print_term(t) + " evaluates to " + to_string(exponent));
      if (abs(exponent) > kMaxExponent) throw NotEvaluable("exponent of " + print_term(t) + " is too large");
      const long e = numerator_of(exponent).convert_to<long>();
      if (e < 0 && base == 0) throw DivisionByZero(print_term(t));
      return pow(base, e);
    }
  }
  throw NotEvaluable("unknown term");
}

Rational Evaluator::apply(const std::string& name, const std::vector<Rational>& args, const Term& site) {
  FunctionKey key{name, args};
  if (auto it = valuation_.functions.find(key); it != valuation_.functions.end()) return it->second;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const Definition* def = nullptr;
  for (const auto& d : definitions_)
    if (d.name == name && d.arity() == args.size()) def = &d;
  if (!def) throw NotEvaluable("no value known for " + print_term(site));
  if (++calls_ > kMaxCalls || depth_ >= kMaxDepth)
    throw NotEvaluable("unfolding " + def->name + " exceeded the evaluation budget");
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!in_sort(args[i], def->arg_sorts[i]))
      throw NotEvaluable(print_term(site) + " is applied outside its domain " +
                         std::string(sort_keyword(def->arg_sorts[i])));

  Scope local;
  for (std::size_t i = 0; i < args.size(); ++i) local[def->params[i]] = args[i];

  ++depth_;
  struct Leave {
    std::size_t& d;
    ~Leave() { --d; }
  } leave{depth_};

  std::optional<Rational> value;
  for (const auto& branch : def->branches) {
    if (!holds(branch.guard, local)) continue;
    Rational v = eval(branch.body, local);
    if (value && *value != v)
      throw NotEvaluable("branches of " + name + " disagree at " + print_function_value(key, *value));
    value = v;
  }
  if (!value) throw NotEvaluable("no branch of " + name + " applies to " + print_term(site));
  memo_[key] = *value;
  return *value;
}

bool Evaluator::holds(const Formula& f, const Scope& scope) {
  switch (f.kind()) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Compare: {
      Rational a = eval(f.terms()[0], scope);
      Rational b = eval(f.terms()[1], scope);
      switch (f.rel()) {
        case Rel::Eq: return a == b;
        case Rel::Ne: return a != b;
        case Rel::Lt: return a < b;
        case Rel::Le: return a <= b;
        case Rel::Gt: return a > b;
        case Rel::Ge: return a >= b;
      }
      return false;
    }
    case FormulaKind::Member: return in_sort(eval(f.terms()[0], scope), f.sort());
    case FormulaKind::Not: return !holds(f.subs()[0], scope);
    case FormulaKind::And: return holds(f.subs()[0], scope) && holds(f.subs()[1], scope);
    case FormulaKind::Or: return holds(f.subs()[0], scope) || holds(f.subs()[1], scope);
    case FormulaKind::Implies: return !holds(f.subs()[0], scope) || holds(f.subs()[1], scope);
    case FormulaKind::Forall:
    case FormulaKind::Exists: throw NotEvaluable("quantified formula " + print_formula(f));
  }
  return false;
}

Rational eval_exact(const Term& t, const Valuation& valuation, std::span<const Definition> definitions) {
  return Evaluator(valuation, definitions).eval(t);
}

bool eval_formula(const Formula& f, const Valuation& valuation, std::span<const Definition> definitions) {
  return Evaluator(valuation, definitions).holds(f);
}

}  // namespace mathcheck
