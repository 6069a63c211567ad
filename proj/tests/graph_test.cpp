#include "mathcheck/graph.hpp"
#include "mathcheck/errors.hpp"
#include "mathcheck/syntax.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

using namespace mathcheck;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(MATHCHECK_FIXTURES) + "/graph/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Premise lists straight from the file text, without the context parser.
std::map<std::size_t, std::vector<std::size_t>> adjacency_oracle(const std::string& text) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  std::regex line(R"(^(\d+)\s*\|[\s|]*CONCLUSION\[([\d,\s]*)\])");
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) {
    std::smatch m;
    if (!std::regex_search(l, m, line)) continue;
    std::istringstream ids(std::regex_replace(m[2].str(), std::regex(","), " "));
    std::size_t p;
    while (ids >> p) out[std::stoul(m[1])].push_back(p);
  }
  return out;
}

std::set<std::size_t> dfs_oracle(const std::map<std::size_t, std::vector<std::size_t>>& preds, std::size_t v) {
  std::set<std::size_t> seen;
  std::function<void(std::size_t)> visit = [&](std::size_t u) {
    auto it = preds.find(u);
    if (it == preds.end()) return;
    for (auto p : it->second)
      if (seen.insert(p).second) visit(p);
  };
  visit(v);
  return seen;
}

// Minimal DOT reader: a digraph block of node and edge statements only.
bool dot_reparse(const std::string& dot, std::size_t& nodes, std::size_t& edges) {
  std::smatch m;
  if (!std::regex_match(dot, m, std::regex(R"(\s*digraph\s*\{([^{}]*)\}\s*)"))) return false;
  std::string body = m[1];
  std::regex node(R"re(^\s*(\w+)\s*\[label="(\d+):(\w+)"\]\s*;?\s*$)re");
  std::regex edge(R"(^\s*(\w+)\s*->\s*(\w+)\s*;?\s*$)");
  nodes = edges = 0;
  std::set<std::string> names;
  std::istringstream in(body);
  std::string l;
  std::vector<std::pair<std::string, std::string>> pending;
  while (std::getline(in, l)) {
    if (l.find_first_not_of(" \t") == std::string::npos) continue;
    if (std::regex_match(l, m, node)) {
      names.insert(m[1]);
      ++nodes;
    } else if (std::regex_match(l, m, edge)) {
      pending.emplace_back(m[1], m[2]);
      ++edges;
    } else {
      return false;
    }
  }
  for (const auto& [a, b] : pending)
    if (!names.count(a) || !names.count(b)) return false;
  return true;
}

Context chain(std::size_t conclusions, bool dense) {
  std::string text = "0 | FACT: x0 = 0\n";
  for (std::size_t i = 1; i <= conclusions; ++i) {
    text += std::to_string(i) + " | CONCLUSION[";
    if (dense) {
      for (std::size_t p = 0; p < i; ++p) text += (p ? ", " : "") + std::to_string(p);
    } else {
      text += std::to_string(i - 1);
    }
    text += "]: x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
  }
  return parse_context(text);
}

}  // namespace

TEST(Graph, SquareSumShape) {
  Context ctx = parse_context(read_fixture("square_sum.ctx"));
  SolutionGraph g = build_graph(ctx);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edges(), (std::set<Edge>{{0, 1}, {0, 2}, {1, 2}}));

  auto js = extract_judgments(g, ctx);
  ASSERT_EQ(js.size(), 2u);
  EXPECT_EQ(js[0].conclusion, 1u);
  EXPECT_EQ(js[0].premises, (std::vector<StatementId>{0}));
  EXPECT_EQ(js[1].conclusion, 2u);
  EXPECT_EQ(js[1].premises, (std::vector<StatementId>{0, 1}));

  EXPECT_EQ(foundational_premises(g, 2), (std::set<StatementId>{0}));
  EXPECT_TRUE(foundational_premises(g, 0).empty());
}

TEST(Graph, DenseChainEdges) {
  for (std::size_t n : {1u, 4u, 9u}) {
    SolutionGraph g = build_graph(chain(n - 1, true));
    EXPECT_EQ(g.edges().size(), n * (n - 1) / 2);
  }
  EXPECT_EQ(cost_metrics(build_graph(chain(4, true))).C1, 10u);
}

TEST(Graph, NoConclusions) {
  SolutionGraph g = build_graph(parse_context("0 | FACT: x = 1\n1 | FACT: y = 2\n"));
  EXPECT_TRUE(g.edges().empty());
  EXPECT_TRUE(extract_judgments(g, parse_context("0 | FACT: x = 1\n")).empty());
  CostMetrics m = cost_metrics(g);
  EXPECT_EQ(m.n, 0u);
  EXPECT_EQ(m.C1, 0u);
  EXPECT_EQ(m.C2, 0u);
}

TEST(Graph, InvalidContextRejected) {
  Context ctx;
  Statement s;
  s.kind = StatementKind::Conclusion;
  s.body = parse_formula("x = 1");
  ctx.statements.push_back(s);
  EXPECT_THROW(build_graph(ctx), StructureError);
}

TEST(Graph, SixStatementFixtureMatchesAdjacencyOracle) {
  const std::string text = read_fixture("six.ctx");
  Context ctx = parse_context(text);
  SolutionGraph g = build_graph(ctx);
  auto expected = adjacency_oracle(text);
  auto js = extract_judgments(g, ctx);
  ASSERT_EQ(js.size(), expected.size());
  for (const auto& j : js) {
    auto want = expected.at(j.conclusion);
    std::sort(want.begin(), want.end());
    EXPECT_EQ(j.premises, want) << "conclusion " << j.conclusion;
  }
  // g is used only by statement 5, which cites it directly.
  EXPECT_TRUE(js[0].definitions.empty());
  EXPECT_TRUE(js[2].definitions.empty());

  for (StatementId v = 0; v < ctx.size(); ++v) {
    std::set<std::size_t> want;
    for (auto a : dfs_oracle(expected, v))
      if (ctx.at(a).kind != StatementKind::Conclusion) want.insert(a);
    EXPECT_EQ(foundational_premises(g, v), want) << "node " << v;
  }

  CostMetrics m = cost_metrics(g);
  EXPECT_EQ(m.n, 3u);
  EXPECT_EQ(m.M, 2u);
  EXPECT_EQ(m.C1, 6u);
  EXPECT_EQ(m.C2, 4u);  // definition premise not counted
}

TEST(Graph, AmbientDefinitionsAttached) {
  Context ctx = parse_context(
      "0 | DEFINITION: definition(h): NN -> NN h(n) := n + 1\n"
      "1 | DEFINITION: definition(g): NN -> NN g(n) := h(n) * 2\n"
      "2 | FACT: a = 1\n"
      "3 | CONCLUSION[2]: g(a) = 4\n");
  auto js = extract_judgments(build_graph(ctx), ctx);
  ASSERT_EQ(js.size(), 1u);
  EXPECT_EQ(js[0].premises, (std::vector<StatementId>{2}));
  EXPECT_EQ(js[0].definitions, (std::vector<StatementId>{0, 1}));
  auto j = to_json(js[0], ctx);
  EXPECT_EQ(j["conclusion"]["formula"], "g(a) = 4");
  EXPECT_EQ(j["definitions"].size(), 2u);
}

TEST(Graph, DiamondFoundationalDeduplicated) {
  const std::string text =
      "0 | FACT: x = 1\n"
      "1 | CONCLUSION[0]: x + 1 = 2\n"
      "2 | CONCLUSION[0]: x + 2 = 3\n"
      "3 | CONCLUSION[1, 2]: 2 * x + 3 = 5\n";
  Context ctx = parse_context(text);
  SolutionGraph g = build_graph(ctx);
  EXPECT_EQ(foundational_premises(g, 3), (std::set<StatementId>{0}));
  EXPECT_EQ(dfs_oracle(adjacency_oracle(text), 3), (std::set<std::size_t>{0, 1, 2}));
  EXPECT_EQ(g.ancestors(3), (std::set<StatementId>{0, 1, 2}));
}

TEST(Graph, SingleConclusionCosts) {
  Context ctx = parse_context("0 | FACT: x = 1\n1 | CONCLUSION[0]: x + 1 = 2\n");
  SolutionGraph g = build_graph(ctx);
  EXPECT_EQ(extract_judgments(g, ctx).size(), 1u);
  CostMetrics m = cost_metrics(g);
  EXPECT_EQ(m.n, 1u);
  EXPECT_EQ(m.M, 1u);
  EXPECT_EQ(m.C1, 1u);
  EXPECT_EQ(m.C2, 1u);
}

TEST(Graph, RandomSparseCostInvariants) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t facts = 1 + rng() % 3, total = facts + 1 + rng() % 20;
    std::string text;
    std::size_t sum = 0, conclusions = 0, widest = 0;
    bool within_ordinal = true;
    for (std::size_t i = 0; i < total; ++i) {
      text += std::to_string(i) + " | ";
      if (i < facts) {
        text += "FACT: x" + std::to_string(i) + " = 1\n";
        continue;
      }
      std::set<std::size_t> ps;
      const std::size_t k = 1 + rng() % std::min<std::size_t>(3, i);
      while (ps.size() < k) ps.insert(rng() % i);
      text += "CONCLUSION[";
      bool first = true;
      for (auto p : ps) text += (first ? "" : ", ") + std::to_string(p), first = false;
      text += "]: x" + std::to_string(i) + " = 1\n";
      sum += k;
      ++conclusions;
      within_ordinal = within_ordinal && k <= conclusions;
      widest = std::max(widest, k);
    }
    Context ctx = parse_context(text);
    SolutionGraph g = build_graph(ctx);
    CostMetrics m = cost_metrics(g);
    EXPECT_EQ(m.n, conclusions);
    EXPECT_EQ(m.M, widest);
    EXPECT_EQ(m.C2, sum);
    EXPECT_LE(m.C2, 3 * m.n);
    EXPECT_LE(m.C2, m.n * m.M);
    if (within_ordinal) EXPECT_GE(m.C1, m.C2);

    auto js = extract_judgments(g, ctx);
    std::size_t fed = 0;
    std::set<StatementId> covered;
    for (const auto& j : js) {
      fed += j.premises.size();
      EXPECT_TRUE(covered.insert(j.conclusion).second);
    }
    EXPECT_EQ(fed, m.C2);
    EXPECT_EQ(covered.size(), m.n);
    for (StatementId v = 0; v < ctx.size(); ++v) {
      auto f = foundational_premises(g, v);
      auto anc = g.ancestors(v);
      for (auto a : f) {
        EXPECT_NE(ctx.at(a).kind, StatementKind::Conclusion);
        EXPECT_TRUE(anc.count(a));
      }
    }
  }
}

TEST(Graph, DotExport) {
  std::size_t nodes = 0, edges = 0;
  const std::string empty = to_dot(SolutionGraph{});
  EXPECT_EQ(std::regex_replace(empty, std::regex(R"(\s)"), ""), "digraph{}");
  EXPECT_TRUE(dot_reparse(empty, nodes, edges));
  EXPECT_EQ(nodes, 0u);

  const std::string dot = to_dot(build_graph(parse_context(read_fixture("square_sum.ctx"))));
  ASSERT_TRUE(dot_reparse(dot, nodes, edges)) << dot;
  EXPECT_EQ(nodes, 3u);
  EXPECT_EQ(edges, 3u);
  EXPECT_NE(dot.find("\"2:Conclusion\""), std::string::npos);

  const std::string big = to_dot(build_graph(chain(12, true)));
  ASSERT_TRUE(dot_reparse(big, nodes, edges));
  EXPECT_EQ(nodes, 13u);
  EXPECT_EQ(edges, 78u);
}
