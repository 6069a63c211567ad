#pragma once

#include "mathcheck/ast.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mathcheck {

enum class StatementKind { Fact, Assumption, Theorem, Definition, Conclusion };

std::string_view kind_keyword(StatementKind k);  // FACT, ASSUMPTION, ...
std::string_view kind_name(StatementKind k);     // Fact, Assumption, ...
std::optional<StatementKind> kind_from_keyword(std::string_view kw);

using StatementId = std::size_t;

struct Statement {
  StatementId id = 0;
  StatementKind kind = StatementKind::Fact;
  std::variant<Formula, Definition> body = Formula::truth();
  // Nonempty exactly for conclusions; every id is smaller than `id`.
  std::vector<StatementId> premises;
  std::string source_text;
  // Number of enclosing open assumptions.
  int depth = 0;

  bool has_definition() const { return std::holds_alternative<Definition>(body); }
  const Formula& formula() const { return std::get<Formula>(body); }
  const Definition& definition() const { return std::get<Definition>(body); }
  // The formula a statement contributes as a premise; definitions are desugared.
  Formula as_premise() const;
  std::string body_text() const;
};

// Fitch-style context: statements in order, with ids 0..n-1.
struct Context {
  std::vector<Statement> statements;
  std::string problem_text;
  std::optional<Formula> goal;

  std::size_t size() const { return statements.size(); }
  const Statement& at(StatementId id) const { return statements.at(id); }
  std::vector<Definition> definitions() const;
};

enum class Severity { Error, Lint };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::optional<StatementId> statement;
  std::string rule;
  std::string message;

  std::string to_string() const;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

// Line format, one statement per line:
//   <id> | [| ...] <KIND>[<premise ids>]: <formula or definition> // <source text>
// Extra leading bars give the assumption depth. Blank lines and lines starting
// with '#' are ignored; `@problem: ...` and `@goal: <formula>` set metadata.
// Throws SyntaxError, ReferenceError (missing/forward/out-of-scope premise),
// NestingError (ill-bracketed assumption scopes) or StructureError.
Context parse_context(std::string_view text);
std::string print_context(const Context& ctx);

// Structural checks. Errors: id-sequence, kind-premise-mismatch, body-kind,
// dangling-premise, forward-premise, premise-scope, nesting, duplicate-definition.
// Lints: premise-width (> 4 premises), duplicate-premise, guard-overlap, guard-gap.
std::vector<Diagnostic> validate_context(const Context& ctx);

// Bounded enumeration over integer-sorted parameters.
std::vector<Diagnostic> lint_definition(const Definition& d, std::optional<StatementId> id = std::nullopt);

// Whether statement `premise` may be cited by statement `citer` under Fitch scoping.
bool premise_accessible(const Context& ctx, StatementId premise, StatementId citer);

nlohmann::json to_json(const Statement& s);
nlohmann::json to_json(const Context& ctx);
Context context_from_json(const nlohmann::json& j);

}  // namespace mathcheck
