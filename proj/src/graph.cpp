#include "mathcheck/graph.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include <algorithm>
#include <map>

namespace mathcheck {

std::vector<StatementId> SolutionGraph::conclusions() const {
  std::vector<StatementId> out;
  for (StatementId v = 0; v < kinds_.size(); ++v)
    if (kinds_[v] == StatementKind::Conclusion) out.push_back(v);
  return out;
}

std::set<StatementId> SolutionGraph::ancestors(StatementId v) const {
  std::set<StatementId> seen;
  std::vector<StatementId> stack(in_.at(v).begin(), in_.at(v).end());
  while (!stack.empty()) {
    StatementId u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    stack.insert(stack.end(), in_[u].begin(), in_[u].end());
  }
  return seen;
}

SolutionGraph build_graph(const Context& ctx) {
  auto diagnostics = validate_context(ctx);
  for (const auto& d : diagnostics)
    if (d.severity == Severity::Error) throw StructureError("cannot build a graph: " + d.to_string());
  SolutionGraph g;
  g.kinds_.reserve(ctx.size());
  g.in_.resize(ctx.size());
  for (const auto& s : ctx.statements) {
    g.kinds_.push_back(s.kind);
    std::set<StatementId> unique(s.premises.begin(), s.premises.end());
    g.in_[s.id].assign(unique.begin(), unique.end());
    for (StatementId p : unique) g.edges_.emplace(p, s.id);
  }
  return g;
}

namespace {

void add_symbols(const Formula& f, std::set<std::string>& names) {
  std::set<std::pair<std::string, std::size_t>> found;
  collect_functions(f, found);
  for (const auto& [name, arity] : found) names.insert(name);
}

}  // namespace

std::vector<Judgment> extract_judgments(const SolutionGraph& g, const Context& ctx) {
  std::map<std::string, StatementId> defined;
  for (const auto& s : ctx.statements)
    if (s.has_definition()) defined.emplace(s.definition().name, s.id);

  std::vector<Judgment> out;
  for (StatementId c : g.conclusions()) {
    Judgment j;
    j.conclusion = c;
    j.premises = g.premises(c);

    std::set<std::string> pending;
    add_symbols(ctx.at(c).as_premise(), pending);
    for (StatementId p : j.premises) add_symbols(ctx.at(p).as_premise(), pending);
    std::set<std::string> done;
    std::set<StatementId> defs;
    while (!pending.empty()) {
      std::string name = *pending.begin();
      pending.erase(pending.begin());
      if (!done.insert(name).second) continue;
      auto it = defined.find(name);
      if (it == defined.end()) continue;
      defs.insert(it->second);
      std::set<std::string> more;
      add_symbols(ctx.at(it->second).as_premise(), more);
      for (const auto& m : more)
        if (!done.count(m)) pending.insert(m);
    }
    for (StatementId d : defs)
      if (!std::count(j.premises.begin(), j.premises.end(), d)) j.definitions.push_back(d);
    out.push_back(std::move(j));
  }
  return out;
}

std::set<StatementId> foundational_premises(const SolutionGraph& g, StatementId node) {
  std::set<StatementId> out;
  for (StatementId a : g.ancestors(node))
    if (g.kind(a) != StatementKind::Conclusion) out.insert(a);
  return out;
}

CostMetrics cost_metrics(const SolutionGraph& g) {
  CostMetrics m;
  for (StatementId c : g.conclusions()) {
    ++m.n;
    std::size_t k = 0;
    for (StatementId p : g.premises(c))
      if (g.kind(p) != StatementKind::Definition) ++k;
    m.M = std::max(m.M, k);
    m.C2 += k;
  }
  m.C1 = m.n * (m.n + 1) / 2;
  return m;
}

std::string to_dot(const SolutionGraph& g) {
  std::string out = "digraph{";
  if (g.node_count()) out += "\n";
  for (StatementId v = 0; v < g.node_count(); ++v)
    out += "  n" + std::to_string(v) + " [label=\"" + std::to_string(v) + ":" + std::string(kind_name(g.kind(v))) +
           "\"];\n";
  for (const auto& [a, b] : g.edges()) out += "  n" + std::to_string(a) + " -> n" + std::to_string(b) + ";\n";
  return out + "}\n";
}

nlohmann::json to_json(const Judgment& j, const Context& ctx) {
  nlohmann::json premises = nlohmann::json::array();
  for (StatementId p : j.premises) premises.push_back({{"id", p}, {"formula", ctx.at(p).body_text()}});
  nlohmann::json defs = nlohmann::json::array();
  for (StatementId d : j.definitions) defs.push_back({{"id", d}, {"formula", ctx.at(d).body_text()}});
  return {{"conclusion", {{"id", j.conclusion}, {"formula", ctx.at(j.conclusion).body_text()}}},
          {"premises", premises},
          {"definitions", defs}};
}

nlohmann::json to_json(const CostMetrics& m) {
  return {{"n", m.n}, {"M", m.M}, {"C1", m.C1}, {"C2", m.C2}};
}

}  // namespace mathcheck
