#pragma once

#include "mathcheck/rational.hpp"

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mathcheck {

// Numeric domains, ordered by inclusion: Nat < Int < Rat < Real.
enum class Sort { Nat, Int, Rat, Real };

std::string_view sort_keyword(Sort s);  // "NN", "ZZ", "QQ", "RR"
std::optional<Sort> sort_from_keyword(std::string_view kw);
inline Sort sort_join(Sort a, Sort b) { return a < b ? b : a; }

enum class TermKind { Literal, Variable, Apply, Neg, Add, Sub, Mul, Div, Pow };

// Immutable arithmetic term. Copies share structure.
class Term {
 public:
  static Term literal(Rational value);
  static Term literal(long value) { return literal(Rational(value)); }
  static Term variable(std::string name);
  static Term apply(std::string function, std::vector<Term> args);
  static Term neg(Term operand);
  static Term add(Term lhs, Term rhs);
  static Term sub(Term lhs, Term rhs);
  static Term mul(Term lhs, Term rhs);
  static Term div(Term lhs, Term rhs);
  // The exponent must be an integer literal or a variable.
  static Term pow(Term base, Term exponent);
  static Term binary(TermKind kind, Term lhs, Term rhs);

  TermKind kind() const { return node_->kind; }
  const Rational& value() const { return node_->value; }
  // Variable name or applied function name.
  const std::string& name() const { return node_->name; }
  std::span<const Term> args() const { return node_->args; }
  const Term& lhs() const { return node_->args.at(0); }
  const Term& rhs() const { return node_->args.at(1); }

  bool is_literal() const { return kind() == TermKind::Literal; }
  bool is_variable() const { return kind() == TermKind::Variable; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node {
    TermKind kind;
    Rational value;
    std::string name;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view rel_symbol(Rel r);
Rel negate_rel(Rel r);

enum class FormulaKind { True, False, Compare, Member, Not, And, Or, Implies, Forall, Exists };

class Formula {
 public:
  static Formula truth();
  static Formula falsity();
  static Formula compare(Rel rel, Term lhs, Term rhs);
  static Formula eq(Term lhs, Term rhs) { return compare(Rel::Eq, std::move(lhs), std::move(rhs)); }
  static Formula member(Term term, Sort sort);
  static Formula negation(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  // kind is And, Or or Implies.
  static Formula binary(FormulaKind kind, Formula a, Formula b);
  static Formula forall(std::string var, Sort sort, Formula body);
  static Formula exists(std::string var, Sort sort, Formula body);
  // Left-nested conjunction/disjunction; empty lists give true/false.
  static Formula conj_all(std::span<const Formula> parts);
  static Formula disj_all(std::span<const Formula> parts);

  FormulaKind kind() const { return node_->kind; }
  Rel rel() const { return node_->rel; }
  Sort sort() const { return node_->sort; }
  // Bound variable of a quantifier.
  const std::string& var() const { return node_->var; }
  // Compare: lhs/rhs. Member: the single term.
  std::span<const Term> terms() const { return node_->terms; }
  std::span<const Formula> subs() const { return node_->subs; }
  const Formula& body() const { return node_->subs.at(0); }

  bool is_quantifier() const {
    return kind() == FormulaKind::Forall || kind() == FormulaKind::Exists;
  }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    FormulaKind kind;
    Rel rel = Rel::Eq;
    Sort sort = Sort::Real;
    std::string var;
    std::vector<Term> terms;
    std::vector<Formula> subs;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Branch {
  Term body;
  Formula guard;  // true for an unguarded branch
  friend bool operator==(const Branch&, const Branch&) = default;
};

// Guarded piecewise definition `definition(f): NN -> NN  f(n) := ... if ... | ...`.
struct Definition {
  std::string name;
  std::vector<Sort> arg_sorts;
  Sort result = Sort::Real;
  std::vector<std::string> params;
  std::vector<Branch> branches;

  std::size_t arity() const { return params.size(); }
  friend bool operator==(const Definition&, const Definition&) = default;
};

// Sort a quantifier body implies for its bound variable: the membership guard
// heading an implication (forall) or conjunction (exists); Real otherwise.
Sort implied_binder_sort(FormulaKind quantifier, const std::string& var, const Formula& body);

std::set<std::string> free_variables(const Term& t);
std::set<std::string> free_variables(const Formula& f);
// Names of applied function symbols (with their arities) anywhere in the input.
void collect_functions(const Term& t, std::set<std::pair<std::string, std::size_t>>& out);
void collect_functions(const Formula& f, std::set<std::pair<std::string, std::size_t>>& out);

Term substitute(const Term& t, const std::string& var, const Term& replacement);
// Replaces free occurrences of `var`; throws CaptureError if a binder would
// capture a free variable of `replacement`.
Formula substitute(const Formula& f, const std::string& var, const Term& replacement);

// Checks the per-definition invariants (arity, guard variables); throws ArityError / Error.
void check_definition(const Definition& d);

// Forall over the parameters with membership antecedents and one guarded
// equation per distinct branch body; equal bodies have their guards disjoined.
Formula desugar_definition(const Definition& d);

}  // namespace mathcheck
