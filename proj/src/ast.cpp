#include "mathcheck/ast.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include <algorithm>

namespace mathcheck {

std::string_view sort_keyword(Sort s) {
  switch (s) {
    case Sort::Nat: return "NN";
    case Sort::Int: return "ZZ";
    case Sort::Rat: return "QQ";
    case Sort::Real: return "RR";
  }
  return "RR";
}

std::optional<Sort> sort_from_keyword(std::string_view kw) {
  if (kw == "NN") return Sort::Nat;
  if (kw == "ZZ") return Sort::Int;
  if (kw == "QQ") return Sort::Rat;
  if (kw == "RR") return Sort::Real;
  return std::nullopt;
}

// ---- Term -------------------------------------------------------------------

Term Term::literal(Rational value) {
  return Term(std::make_shared<const Node>(Node{TermKind::Literal, std::move(value), {}, {}}));
}

Term Term::variable(std::string name) {
  return Term(std::make_shared<const Node>(Node{TermKind::Variable, 0, std::move(name), {}}));
}

Term Term::apply(std::string function, std::vector<Term> args) {
  return Term(std::make_shared<const Node>(Node{TermKind::Apply, 0, std::move(function), std::move(args)}));
}

Term Term::neg(Term operand) {
  return Term(std::make_shared<const Node>(Node{TermKind::Neg, 0, {}, {std::move(operand)}}));
}

Term Term::binary(TermKind kind, Term lhs, Term rhs) {
  if (kind == TermKind::Pow) return pow(std::move(lhs), std::move(rhs));
  return Term(std::make_shared<const Node>(Node{kind, 0, {}, {std::move(lhs), std::move(rhs)}}));
}

Term Term::add(Term lhs, Term rhs) { return binary(TermKind::Add, std::move(lhs), std::move(rhs)); }
Term Term::sub(Term lhs, Term rhs) { return binary(TermKind::Sub, std::move(lhs), std::move(rhs)); }
Term Term::mul(Term lhs, Term rhs) { return binary(TermKind::Mul, std::move(lhs), std::move(rhs)); }
Term Term::div(Term lhs, Term rhs) { return binary(TermKind::Div, std::move(lhs), std::move(rhs)); }

Term Term::pow(Term base, Term exponent) {
  const bool ok = exponent.is_variable() || (exponent.is_literal() && is_integer(exponent.value()));
  if (!ok) throw Error("exponent must be an integer literal or a variable");
  return Term(std::make_shared<const Node>(Node{TermKind::Pow, 0, {}, {std::move(base), std::move(exponent)}}));
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::Literal: return a.value() == b.value();
    case TermKind::Variable: return a.name() == b.name();
    case TermKind::Apply:
      if (a.name() != b.name()) return false;
      break;
    default: break;
  }
  return std::ranges::equal(a.args(), b.args());
}

// ---- Formula ----------------------------------------------------------------

std::string_view rel_symbol(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
  }
  return "=";
}

Rel negate_rel(Rel r) {
  switch (r) {
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Gt: return Rel::Le;
    case Rel::Ge: return Rel::Lt;
  }
  return Rel::Ne;
}

Formula Formula::truth() { return Formula(std::make_shared<const Node>(Node{FormulaKind::True})); }
Formula Formula::falsity() { return Formula(std::make_shared<const Node>(Node{FormulaKind::False})); }

Formula Formula::compare(Rel rel, Term lhs, Term rhs) {
  Node n{FormulaKind::Compare};
  n.rel = rel;
  n.terms = {std::move(lhs), std::move(rhs)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::member(Term term, Sort sort) {
  Node n{FormulaKind::Member};
  n.sort = sort;
  n.terms = {std::move(term)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::negation(Formula f) {
  Node n{FormulaKind::Not};
  n.subs = {std::move(f)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::conj(Formula a, Formula b) { return binary(FormulaKind::And, std::move(a), std::move(b)); }
Formula Formula::disj(Formula a, Formula b) { return binary(FormulaKind::Or, std::move(a), std::move(b)); }
Formula Formula::implies(Formula a, Formula b) {
  return binary(FormulaKind::Implies, std::move(a), std::move(b));
}

Formula Formula::forall(std::string var, Sort sort, Formula body) {
  Node n{FormulaKind::Forall};
  n.var = std::move(var);
  n.sort = sort;
  n.subs = {std::move(body)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::exists(std::string var, Sort sort, Formula body) {
  Node n{FormulaKind::Exists};
  n.var = std::move(var);
  n.sort = sort;
  n.subs = {std::move(body)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::conj_all(std::span<const Formula> parts) {
  if (parts.empty()) return truth();
  Formula acc = parts.front();
  for (const auto& p : parts.subspan(1)) acc = conj(acc, p);
  return acc;
}

Formula Formula::disj_all(std::span<const Formula> parts) {
  if (parts.empty()) return falsity();
  Formula acc = parts.front();
  for (const auto& p : parts.subspan(1)) acc = disj(acc, p);
  return acc;
}

Formula Formula::binary(FormulaKind kind, Formula a, Formula b) {
  Node n{kind};
  n.subs = {std::move(a), std::move(b)};
  return Formula(std::make_shared<const Node>(std::move(n)));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case FormulaKind::True:
    case FormulaKind::False: return true;
    case FormulaKind::Compare:
      return a.rel() == b.rel() && std::ranges::equal(a.terms(), b.terms());
    case FormulaKind::Member:
      return a.sort() == b.sort() && a.terms()[0] == b.terms()[0];
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return a.var() == b.var() && a.sort() == b.sort() && a.body() == b.body();
    default: return std::ranges::equal(a.subs(), b.subs());
  }
}

}  // namespace mathcheck
