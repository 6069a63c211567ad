#pragma once

#include "mathcheck/ast.hpp"
#include "mathcheck/verdict.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mathcheck {

// premises |- conclusion, with the definitions in scope.
struct EntailmentQuery {
  std::vector<Formula> premises;
  Formula conclusion = Formula::truth();
  std::vector<Definition> definitions;
};

struct FunctionSort {
  std::vector<Sort> args;
  Sort result = Sort::Real;
  friend bool operator==(const FunctionSort&, const FunctionSort&) = default;
};

struct SortMap {
  std::map<std::string, Sort> variables;
  std::map<std::string, FunctionSort> functions;
};

// Variable sorts come from membership atoms among the premises' top-level
// conjuncts (joined); conclusion memberships are never used. Function sorts
// come from definitions, else arity of use with Real arguments and result.
// Throws SortClash on inconsistent arity or a name used as both.
SortMap infer_sorts(const EntailmentQuery& q);

struct SmtScript {
  std::string logic;
  std::vector<std::string> declarations;
  std::vector<std::string> assertions;
  bool produce_models = true;
  int timeout_ms = 5000;

  // Solver-independent SMT-LIB 2 text; the timeout is passed on the command line.
  std::string text() const;
};

// Ground instances of definitions are added for literal arguments up to this bound.
constexpr long kMaxInstanceArgument = 32;

// Throws UnsupportedFeature (QQ membership of a real term, symbolic
// exponents) and SortClash.
// With ground_only, definitions contribute only their instances at literal
// arguments, which makes a weaker but quantifier-free problem.
SmtScript to_smtlib(const EntailmentQuery& q, int timeout_ms = 5000, bool ground_only = false);

struct SolverOutcome {
  enum class Kind { Unsat, Sat, Unknown, SolverError };
  Kind kind = Kind::Unknown;
  // Zero-arity symbol -> value text as printed by the solver.
  std::map<std::string, std::string> model;
  std::string raw_model;
  std::string reason;
  int exit_code = 0;
};

std::string_view outcome_name(SolverOutcome::Kind k);

// Value of an SMT-LIB numeral expression: 3, 1.5, (- 2), (/ 1.0 3.0).
std::optional<Rational> parse_smt_value(const std::string& text);
SolverOutcome parse_solver_output(const std::string& out);

struct SolverConfig {
  std::string path = "z3";
  std::vector<std::string> extra_args;
  int timeout_ms = 5000;
  int grace_ms = 1000;
  // When set, every script is written there as <sha256>.smt2.
  std::optional<std::filesystem::path> artifact_dir;
};

std::string sha256_hex(const std::string& data);

class SmtBackend {
 public:
  explicit SmtBackend(SolverConfig config) : config_(std::move(config)) {}

  const SolverConfig& config() const { return config_; }
  SolverOutcome run(const SmtScript& script);
  // Unsat -> Valid; Sat -> Invalid with a counterexample; otherwise Unknown.
  Verdict check(const EntailmentQuery& q);

  std::size_t queries() const;
  std::size_t cache_hits() const;

 private:
  std::vector<std::string> command_line() const;
  Verdict decide(const EntailmentQuery& q, const SolverOutcome& o);

  SolverConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, SolverOutcome> cache_;
  std::size_t queries_ = 0;
  std::size_t hits_ = 0;
};

}  // namespace mathcheck
