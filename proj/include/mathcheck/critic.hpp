#pragma once

#include "mathcheck/cas.hpp"
#include "mathcheck/context.hpp"
#include "mathcheck/graph.hpp"
#include "mathcheck/smt.hpp"
#include "mathcheck/verdict.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mathcheck {

enum class Route { Arithmetic, Algebraic, Logical };

std::string_view route_name(Route r);

// A judgment with its formulas resolved from the context.
struct ResolvedJudgment {
  StatementId id = 0;
  std::vector<Formula> premises;  // non-definition premises, in id order
  Formula conclusion = Formula::truth();
  std::vector<Definition> definitions;  // cited and ambient
};

ResolvedJudgment resolve(const Judgment& j, const Context& ctx);

Route classify_judgment(const ResolvedJudgment& j);

struct CriticOptions {
  SolverConfig smt;
  EquivOptions cas;
  unsigned threads = 1;
  // Optional post-explanation of a decided verdict; never changes the verdict.
  std::function<std::string(const ResolvedJudgment&, const Verdict&)> explainer;
};

class Critic {
 public:
  explicit Critic(CriticOptions options);

  Verdict verify_judgment(const ResolvedJudgment& j);

  // The individual tool legs.
  Verdict cas_leg(const ResolvedJudgment& j);
  Verdict exact_leg(const ResolvedJudgment& j);
  Verdict smt_leg(const ResolvedJudgment& j);

  SmtBackend& smt() { return smt_; }
  const CriticOptions& options() const { return options_; }

 private:
  CriticOptions options_;
  SmtBackend smt_;
};

struct JudgmentResult {
  StatementId id = 0;
  Route route = Route::Logical;
  std::vector<StatementId> premises;
  std::vector<StatementId> definitions;
  Verdict verdict;
  std::string explanation;
};

// Statement ids and the text of the strengthened judgment they form.
struct Corollary {
  StatementId conclusion = 0;
  std::vector<StatementId> premises;
  std::string text;
};

struct Report {
  enum class Status { AllValid, HasInvalid, Inconclusive };
  Status status = Status::AllValid;
  std::optional<StatementId> first_invalid;
  std::vector<JudgmentResult> judgments;
  CostMetrics cost;
  std::size_t premises_submitted = 0;
  std::vector<Corollary> corollaries;
  std::vector<StatementId> trusted;  // theorems accepted without proof
};

std::string_view status_name(Report::Status s);
int exit_status(Report::Status s);

// Throws StructureError when the context does not validate.
Report verify_context(const Context& ctx, Critic& critic);

nlohmann::json to_json(const Report& r, const Context& ctx);

struct Feedback {
  StatementId id = 0;
  std::string formula;
  std::string reason;
  std::optional<std::string> counterexample;
  std::string text;
};

std::vector<Feedback> make_feedback(const Report& r, const Context& ctx);
nlohmann::json to_json(const Feedback& f);

// Fewest statements among AllValid candidates; ties go to the lowest index.
std::optional<std::size_t> select_solution(const std::vector<std::pair<Context, Report>>& candidates);

}  // namespace mathcheck
