#pragma once

#include "mathcheck/ast.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mathcheck {

using FunctionKey = std::pair<std::string, std::vector<Rational>>;

// Values for free variables and for individual function applications such as f(2) = 1.
struct Valuation {
  std::map<std::string, Rational> vars;
  std::map<FunctionKey, Rational> functions;
};

std::string print_function_value(const FunctionKey& key, const Rational& value);

// Exact rational evaluation. Function applications are looked up in the
// valuation first, then unfolded through the given definitions (memoised).
// Exactly one guard must select a branch, or all selected branches must agree.
class Evaluator {
 public:
  explicit Evaluator(const Valuation& valuation, std::span<const Definition> definitions = {});

  Rational eval(const Term& t) { return eval(t, valuation_.vars); }
  // Quantifier-free formulas only; quantifiers raise NotEvaluable.
  bool holds(const Formula& f) { return holds(f, valuation_.vars); }

  // Every function value obtained by unfolding a definition, in key order.
  const std::map<FunctionKey, Rational>& unfolded() const { return memo_; }

 private:
  using Scope = std::map<std::string, Rational>;
  Rational eval(const Term& t, const Scope& scope);
  bool holds(const Formula& f, const Scope& scope);
  Rational apply(const std::string& name, const std::vector<Rational>& args, const Term& site);

  const Valuation& valuation_;
  std::span<const Definition> definitions_;
  std::map<FunctionKey, Rational> memo_;
  std::size_t depth_ = 0;
  std::size_t calls_ = 0;
};

Rational eval_exact(const Term& t, const Valuation& valuation, std::span<const Definition> definitions = {});
bool eval_formula(const Formula& f, const Valuation& valuation, std::span<const Definition> definitions = {});

bool in_sort(const Rational& value, Sort s);

}  // namespace mathcheck
