#pragma once

#include "mathcheck/context.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mathcheck {

using Edge = std::pair<StatementId, StatementId>;  // premise -> conclusion

class SolutionGraph {
 public:
  SolutionGraph() = default;

  std::size_t node_count() const { return kinds_.size(); }
  StatementKind kind(StatementId v) const { return kinds_.at(v); }
  const std::set<Edge>& edges() const { return edges_; }
  // In-neighbours in id order.
  const std::vector<StatementId>& premises(StatementId v) const { return in_.at(v); }
  std::vector<StatementId> conclusions() const;
  std::set<StatementId> ancestors(StatementId v) const;

 private:
  friend SolutionGraph build_graph(const Context& ctx);
  std::vector<StatementKind> kinds_;
  std::vector<std::vector<StatementId>> in_;
  std::set<Edge> edges_;
};

// Throws StructureError when validate_context reports errors.
SolutionGraph build_graph(const Context& ctx);

struct Judgment {
  StatementId conclusion = 0;
  std::vector<StatementId> premises;
  // Definitions are ambient: every definition whose symbol is reachable from
  // the premises or the conclusion, in statement order.
  std::vector<StatementId> definitions;
};

std::vector<Judgment> extract_judgments(const SolutionGraph& g, const Context& ctx);

// Non-conclusion ancestors of `node`.
std::set<StatementId> foundational_premises(const SolutionGraph& g, StatementId node);

struct CostMetrics {
  std::size_t n = 0;   // conclusions
  std::size_t M = 0;   // largest premise count
  std::size_t C1 = 0;  // dense cost n(n+1)/2
  std::size_t C2 = 0;  // premises actually fed, definitions excluded
};

CostMetrics cost_metrics(const SolutionGraph& g);

std::string to_dot(const SolutionGraph& g);

nlohmann::json to_json(const Judgment& j, const Context& ctx);
nlohmann::json to_json(const CostMetrics& m);

}  // namespace mathcheck
