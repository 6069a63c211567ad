#include "mathcheck/ast.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include <algorithm>

namespace mathcheck {

namespace {

std::optional<Sort> membership_of(const Formula& f, const std::string& var) {
  if (f.kind() == FormulaKind::Member) {
    const Term& t = f.terms()[0];
    if (t.is_variable() && t.name() == var) return f.sort();
    return std::nullopt;
  }
  if (f.kind() == FormulaKind::And) {
    if (auto s = membership_of(f.subs()[0], var)) return s;
    return membership_of(f.subs()[1], var);
  }
  return std::nullopt;
}

void term_free(const Term& t, std::set<std::string>& out) {
  if (t.is_variable()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) term_free(a, out);
}

void formula_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case FormulaKind::Compare:
    case FormulaKind::Member: {
      std::set<std::string> vars;
      for (const auto& t : f.terms()) term_free(t, vars);
      for (const auto& v : vars)
        if (!bound.contains(v)) out.insert(v);
      return;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      const bool fresh = bound.insert(f.var()).second;
      formula_free(f.body(), bound, out);
      if (fresh) bound.erase(f.var());
      return;
    }
    default:
      for (const auto& s : f.subs()) formula_free(s, bound, out);
  }
}

}  // namespace

Sort implied_binder_sort(FormulaKind quantifier, const std::string& var, const Formula& body) {
  if (quantifier == FormulaKind::Forall && body.kind() == FormulaKind::Implies) {
    if (auto s = membership_of(body.subs()[0], var)) return *s;
  }
  if (quantifier == FormulaKind::Exists) {
    if (auto s = membership_of(body, var)) return *s;
  }
  return Sort::Real;
}

std::set<std::string> free_variables(const Term& t) {
  std::set<std::string> out;
  term_free(t, out);
  return out;
}

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> bound, out;
  formula_free(f, bound, out);
  return out;
}

void collect_functions(const Term& t, std::set<std::pair<std::string, std::size_t>>& out) {
  if (t.kind() == TermKind::Apply) out.emplace(t.name(), t.args().size());
  for (const auto& a : t.args()) collect_functions(a, out);
}

void collect_functions(const Formula& f, std::set<std::pair<std::string, std::size_t>>& out) {
  for (const auto& t : f.terms()) collect_functions(t, out);
  for (const auto& s : f.subs()) collect_functions(s, out);
}

Term substitute(const Term& t, const std::string& var, const Term& replacement) {
  switch (t.kind()) {
    case TermKind::Literal: return t;
    case TermKind::Variable: return t.name() == var ? replacement : t;
    case TermKind::Apply: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const auto& a : t.args()) args.push_back(substitute(a, var, replacement));
      return Term::apply(t.name(), std::move(args));
    }
    case TermKind::Neg: return Term::neg(substitute(t.args()[0], var, replacement));
    case TermKind::Pow: {
      Term exponent = substitute(t.rhs(), var, replacement);
      if (!exponent.is_variable() && !(exponent.is_literal() && is_integer(exponent.value())))
        throw Error("cannot substitute " + print_term(replacement) + " into the exponent of " + print_term(t));
      return Term::pow(substitute(t.lhs(), var, replacement), exponent);
    }
    default:
      return Term::binary(t.kind(), substitute(t.lhs(), var, replacement),
                          substitute(t.rhs(), var, replacement));
  }
}

Formula substitute(const Formula& f, const std::string& var, const Term& replacement) {
  switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False: return f;
    case FormulaKind::Compare:
      return Formula::compare(f.rel(), substitute(f.terms()[0], var, replacement),
                              substitute(f.terms()[1], var, replacement));
    case FormulaKind::Member: return Formula::member(substitute(f.terms()[0], var, replacement), f.sort());
    case FormulaKind::Not: return Formula::negation(substitute(f.subs()[0], var, replacement));
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      if (f.var() == var) return f;
      if (!free_variables(f.body()).contains(var)) return f;
      if (free_variables(replacement).contains(f.var()))
        throw CaptureError("substituting " + print_term(replacement) + " for " + var +
                           " would be captured by the binder of " + f.var());
      Formula body = substitute(f.body(), var, replacement);
      return f.kind() == FormulaKind::Forall ? Formula::forall(f.var(), f.sort(), body)
                                             : Formula::exists(f.var(), f.sort(), body);
    }
    default:
      return Formula::binary(f.kind(), substitute(f.subs()[0], var, replacement),
                             substitute(f.subs()[1], var, replacement));
  }
}

void check_definition(const Definition& d) {
  if (d.branches.empty()) throw Error("definition of " + d.name + " has no branches");
  if (d.arg_sorts.size() != d.params.size())
    throw ArityError("definition of " + d.name + " declares " + std::to_string(d.arg_sorts.size()) +
                     " argument sort(s) but binds " + std::to_string(d.params.size()) + " parameter(s)");
  std::set<std::string> params(d.params.begin(), d.params.end());
  if (params.size() != d.params.size()) throw Error("definition of " + d.name + " repeats a parameter");
  for (const auto& b : d.branches) {
    for (const auto& v : free_variables(b.guard))
      if (!params.contains(v))
        throw Error("guard of " + d.name + " mentions " + v + ", which is not a parameter");
    for (const auto& v : free_variables(b.body))
      if (!params.contains(v))
        throw Error("branch of " + d.name + " mentions " + v + ", which is not a parameter");
    std::set<std::pair<std::string, std::size_t>> fns;
    collect_functions(b.body, fns);
    collect_functions(b.guard, fns);
    for (const auto& [name, arity] : fns)
      if (name == d.name && arity != d.arity())
        throw ArityError(d.name + " is applied to " + std::to_string(arity) + " argument(s) but takes " +
                         std::to_string(d.arity()));
  }
}

Formula desugar_definition(const Definition& d) {
  check_definition(d);
  std::vector<Term> args;
  for (const auto& p : d.params) args.push_back(Term::variable(p));
  const Term head = Term::apply(d.name, args);

  // Group branches with structurally equal bodies, keeping first-appearance order.
  std::vector<std::pair<Term, std::vector<Formula>>> groups;
  for (const auto& b : d.branches) {
    auto it = std::ranges::find_if(groups, [&](const auto& g) { return g.first == b.body; });
    if (it == groups.end()) groups.push_back({b.body, {b.guard}});
    else it->second.push_back(b.guard);
  }

  std::vector<Formula> clauses;
  for (const auto& [body, guards] : groups) {
    const bool unguarded = std::ranges::any_of(guards, [](const Formula& g) { return g.kind() == FormulaKind::True; });
    Formula equation = Formula::eq(head, body);
    clauses.push_back(unguarded ? equation : Formula::implies(Formula::disj_all(guards), equation));
  }
  Formula result = Formula::conj_all(clauses);
  for (std::size_t i = d.params.size(); i-- > 0;) {
    const Sort s = d.arg_sorts[i];
    result = Formula::forall(d.params[i], s,
                             Formula::implies(Formula::member(Term::variable(d.params[i]), s), result));
  }
  return result;
}

}  // namespace mathcheck
