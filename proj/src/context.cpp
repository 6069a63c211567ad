#include "mathcheck/context.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/eval.hpp"
#include "mathcheck/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace mathcheck {

namespace {

constexpr std::size_t kMaxPremises = 4;

struct KindNames {
  StatementKind kind;
  std::string_view keyword;
  std::string_view name;
};
constexpr KindNames kKinds[] = {
    {StatementKind::Fact, "FACT", "Fact"},
    {StatementKind::Assumption, "ASSUMPTION", "Assumption"},
    {StatementKind::Theorem, "THEOREM", "Theorem"},
    {StatementKind::Definition, "DEFINITION", "Definition"},
    {StatementKind::Conclusion, "CONCLUSION", "Conclusion"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Diagnostic error(std::optional<StatementId> id, std::string rule, std::string message) {
  return {Severity::Error, id, std::move(rule), std::move(message)};
}

Diagnostic lint(std::optional<StatementId> id, std::string rule, std::string message) {
  return {Severity::Lint, id, std::move(rule), std::move(message)};
}

// Re-anchor a SyntaxError raised on a substring to its place in the file.
[[noreturn]] void rethrow_at(const SyntaxError& e, std::size_t line, std::size_t column_offset) {
  throw SyntaxError(line, e.line() == 1 ? e.column() + column_offset : e.column(), e.detail(), e.expected());
}

// Overlapping guards only matter when the branches give different values.
bool branches_disagree(const Definition& d, std::size_t a, std::size_t b, const Valuation& point) {
  const auto& ta = d.branches[a].body;
  const auto& tb = d.branches[b].body;
  if (ta == tb) return false;
  try {
    const std::span<const Definition> self(&d, 1);
    return eval_exact(ta, point, self) != eval_exact(tb, point, self);
  } catch (const Error&) {
    return true;
  }
}

}  // namespace

std::string_view kind_keyword(StatementKind k) {
  for (const auto& n : kKinds)
    if (n.kind == k) return n.keyword;
  return "FACT";
}

std::string_view kind_name(StatementKind k) {
  for (const auto& n : kKinds)
    if (n.kind == k) return n.name;
  return "Fact";
}

std::optional<StatementKind> kind_from_keyword(std::string_view kw) {
  for (const auto& n : kKinds)
    if (n.keyword == kw || n.name == kw) return n.kind;
  return std::nullopt;
}

Formula Statement::as_premise() const {
  return has_definition() ? desugar_definition(definition()) : formula();
}

std::string Statement::body_text() const {
  return has_definition() ? print_definition(definition()) : print_formula(formula());
}

std::vector<Definition> Context::definitions() const {
  std::vector<Definition> out;
  for (const auto& s : statements)
    if (s.has_definition()) out.push_back(s.definition());
  return out;
}

std::string Diagnostic::to_string() const {
  std::string s = severity == Severity::Error ? "error" : "lint";
  s += "[" + rule + "]";
  if (statement) s += " at statement " + std::to_string(*statement);
  return s + ": " + message;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::ranges::any_of(diagnostics, [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool premise_accessible(const Context& ctx, StatementId premise, StatementId citer) {
  if (premise >= citer || citer >= ctx.size()) return false;
  const int pd = ctx.at(premise).depth;
  const int cd = ctx.at(citer).depth;
  int lowest = pd;
  for (StatementId k = premise + 1; k < citer; ++k) lowest = std::min(lowest, ctx.at(k).depth);
  if (pd <= cd) return lowest >= pd;
  // Citing into a deeper subproof is only allowed for the step that discharges
  // it: the subproof closes right before `citer`, and the cited line is either
  // its opening assumption or its last line.
  if (pd != cd + 1 || lowest < pd || ctx.at(citer - 1).depth < pd) return false;
  if (premise == citer - 1) return true;
  if (ctx.at(premise).kind != StatementKind::Assumption) return false;
  // The assumption must open the subproof that is closing.
  for (StatementId k = premise + 1; k < citer; ++k)
    if (ctx.at(k).depth == pd && ctx.at(k).kind == StatementKind::Assumption) return false;
  return true;
}

std::vector<Diagnostic> lint_definition(const Definition& d, std::optional<StatementId> id) {
  std::vector<Diagnostic> out;
  if (d.arity() == 0 || d.arity() > 3) return out;
  for (Sort s : d.arg_sorts)
    if (s != Sort::Nat && s != Sort::Int) return out;

  std::vector<std::vector<long>> ranges;
  for (Sort s : d.arg_sorts) {
    std::vector<long> r;
    for (long v = s == Sort::Nat ? 0 : -6; v <= (s == Sort::Nat ? 12 : 6); ++v) r.push_back(v);
    ranges.push_back(std::move(r));
  }
  std::vector<std::size_t> idx(d.arity(), 0);
  bool gap_reported = false, overlap_reported = false;
  for (;;) {
    Valuation point;
    std::string where;
    for (std::size_t i = 0; i < d.arity(); ++i) {
      point.vars[d.params[i]] = ranges[i][idx[i]];
      where += (i ? ", " : "") + d.params[i] + " = " + std::to_string(ranges[i][idx[i]]);
    }
    std::vector<std::size_t> selected;
    bool undecided = false;
    for (std::size_t b = 0; b < d.branches.size(); ++b) {
      try {
        if (eval_formula(d.branches[b].guard, point)) selected.push_back(b);
      } catch (const Error&) {
        undecided = true;
      }
    }
    if (!undecided && selected.empty() && !gap_reported) {
      out.push_back(lint(id, "guard-gap", "no branch of " + d.name + " applies at " + where));
      gap_reported = true;
    }
    for (std::size_t a = 0; a < selected.size() && !overlap_reported; ++a)
      for (std::size_t b = a + 1; b < selected.size() && !overlap_reported; ++b)
        if (branches_disagree(d, selected[a], selected[b], point)) {
          out.push_back(lint(id, "guard-overlap",
                             "branches " + std::to_string(selected[a] + 1) + " and " + std::to_string(selected[b] + 1) +
                                 " of " + d.name + " both apply at " + where));
          overlap_reported = true;
        }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == ranges[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return out;
}

std::vector<Diagnostic> validate_context(const Context& ctx) {
  std::vector<Diagnostic> out;
  std::map<std::string, StatementId> defined;
  int previous_depth = 0;
  for (std::size_t pos = 0; pos < ctx.size(); ++pos) {
    const Statement& s = ctx.statements[pos];
    const StatementId id = s.id;
    if (s.id != pos)
      out.push_back(error(id, "id-sequence", "statement at position " + std::to_string(pos) + " has id " +
                                                 std::to_string(s.id)));

    const bool is_conclusion = s.kind == StatementKind::Conclusion;
    if (is_conclusion && s.premises.empty())
      out.push_back(error(id, "kind-premise-mismatch", "a conclusion must cite at least one premise"));
    if (!is_conclusion && !s.premises.empty())
      out.push_back(error(id, "kind-premise-mismatch",
                          std::string(kind_name(s.kind)) + " statements cannot cite premises"));
    if (s.has_definition() != (s.kind == StatementKind::Definition))
      out.push_back(error(id, "body-kind",
                          s.has_definition() ? "definition body on a non-definition statement"
                                             : "definition statement without a definition body"));

    // Nesting: assumptions open exactly one level, nothing else may deepen it,
    // and a scope closes one level at a time.
    if (s.depth < 0) {
      out.push_back(error(id, "nesting", "negative depth"));
    } else if (s.kind == StatementKind::Assumption) {
      if (s.depth != previous_depth + 1)
        out.push_back(error(id, "nesting", "an assumption must open a subproof one level deeper (depth " +
                                               std::to_string(previous_depth + 1) + ")"));
    } else if (s.depth > previous_depth) {
      out.push_back(error(id, "nesting", "only an assumption may open a subproof"));
    } else if (previous_depth - s.depth > 1) {
      out.push_back(error(id, "nesting", "subproofs must be closed one level at a time"));
    }
    previous_depth = s.depth;

    if (s.has_definition()) {
      const auto& d = s.definition();
      if (auto [it, fresh] = defined.emplace(d.name, id); !fresh)
        out.push_back(error(id, "duplicate-definition",
                            d.name + " is already defined by statement " + std::to_string(it->second)));
      auto lints = lint_definition(d, id);
      out.insert(out.end(), lints.begin(), lints.end());
    }

    std::set<StatementId> seen;
    for (StatementId p : s.premises) {
      if (!seen.insert(p).second) out.push_back(lint(id, "duplicate-premise", "premise " + std::to_string(p) + " cited twice"));
      if (p >= ctx.size())
        out.push_back(error(id, "dangling-premise", "premise " + std::to_string(p) + " does not exist"));
      else if (p >= id)
        out.push_back(error(id, "forward-premise", "premise " + std::to_string(p) + " is not an earlier statement"));
      else if (!premise_accessible(ctx, p, id))
        out.push_back(error(id, "premise-scope", "premise " + std::to_string(p) + " lies in a closed subproof"));
    }
    if (s.premises.size() > kMaxPremises)
      out.push_back(lint(id, "premise-width", "cites " + std::to_string(s.premises.size()) +
                                                  " premises; more than 4 is unusual for a single step"));
  }
  return out;
}

Context parse_context(std::string_view text) {
  Context ctx;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t indent = raw.find_first_not_of(" \t");

    if (line[0] == '@') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw SyntaxError(line_no, indent + 1, "directive without ':'");
      const std::string key = line.substr(1, colon - 1);
      const std::string value = trim(line.substr(colon + 1));
      if (key == "problem") {
        ctx.problem_text += (ctx.problem_text.empty() ? "" : "\n") + value;
      } else if (key == "goal") {
        try {
          ctx.goal = parse_formula(value);
        } catch (const SyntaxError& e) {
          rethrow_at(e, line_no, raw.find(value) );
        }
      } else {
        throw SyntaxError(line_no, indent + 2, "unknown directive '@" + key + "'", {"@problem", "@goal"});
      }
      continue;
    }

    std::size_t i = 0;
    auto column = [&] { return indent + i + 1; };
    auto skip_space = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    };
    if (!std::isdigit(static_cast<unsigned char>(line[0]))) throw SyntaxError(line_no, column(), "expected a statement id", {"statement id"});
    std::size_t id = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) id = id * 10 + (line[i++] - '0');
    skip_space();
    if (i >= line.size() || line[i] != '|') throw SyntaxError(line_no, column(), "expected '|' after the statement id", {"'|'"});
    ++i;
    int depth = 0;
    for (;;) {
      skip_space();
      if (i < line.size() && line[i] == '|') {
        ++depth;
        ++i;
      } else {
        break;
      }
    }
    const std::size_t kind_start = i;
    while (i < line.size() && std::isalpha(static_cast<unsigned char>(line[i]))) ++i;
    const std::string keyword = line.substr(kind_start, i - kind_start);
    auto kind = kind_from_keyword(keyword);
    if (!kind || keyword != kind_keyword(*kind)) {
      i = kind_start;
      throw SyntaxError(line_no, column(), "unknown statement kind '" + keyword + "'",
                        {"FACT", "ASSUMPTION", "THEOREM", "DEFINITION", "CONCLUSION"});
    }

    Statement s;
    s.id = id;
    s.kind = *kind;
    s.depth = depth;
    skip_space();
    if (i < line.size() && line[i] == '[') {
      ++i;
      for (;;) {
        skip_space();
        if (i < line.size() && line[i] == ']' && s.premises.empty()) break;
        if (i >= line.size() || !std::isdigit(static_cast<unsigned char>(line[i])))
          throw SyntaxError(line_no, column(), "expected a premise id", {"premise id"});
        std::size_t p = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) p = p * 10 + (line[i++] - '0');
        s.premises.push_back(p);
        skip_space();
        if (i < line.size() && line[i] == ',') {
          ++i;
          continue;
        }
        break;
      }
      if (i >= line.size() || line[i] != ']') throw SyntaxError(line_no, column(), "expected ']'", {"']'", "','"});
      ++i;
      if (s.kind != StatementKind::Conclusion)
        throw SyntaxError(line_no, column(), "only CONCLUSION statements cite premises");
    }
    skip_space();
    if (i >= line.size() || line[i] != ':') throw SyntaxError(line_no, column(), "expected ':'", {"':'"});
    ++i;

    std::string rest = line.substr(i);
    std::size_t body_offset = indent + i;
    if (const auto comment = rest.find("//"); comment != std::string::npos) {
      s.source_text = trim(rest.substr(comment + 2));
      rest = rest.substr(0, comment);
    }
    const std::string body = trim(rest);
    body_offset += rest.find_first_not_of(" \t") == std::string::npos ? 0 : rest.find_first_not_of(" \t");
    if (body.empty()) throw SyntaxError(line_no, body_offset + 1, "empty statement body", {"formula"});
    try {
      if (s.kind == StatementKind::Definition) s.body = parse_definition(body);
      else s.body = parse_formula(body);
    } catch (const SyntaxError& e) {
      rethrow_at(e, line_no, body_offset);
    }
    if (s.kind == StatementKind::Conclusion && s.premises.empty())
      throw SyntaxError(line_no, indent + kind_start + keyword.size() + 1, "a CONCLUSION must list its premises",
                        {"'['"});
    ctx.statements.push_back(std::move(s));
  }

  for (const auto& d : validate_context(ctx)) {
    if (d.severity != Severity::Error) continue;
    const std::string what = d.to_string();
    if (d.rule == "dangling-premise" || d.rule == "forward-premise" || d.rule == "premise-scope")
      throw ReferenceError(what);
    if (d.rule == "nesting") throw NestingError(what);
    throw StructureError(what);
  }
  return ctx;
}

std::string print_context(const Context& ctx) {
  std::string out;
  if (!ctx.problem_text.empty()) {
    std::istringstream in(ctx.problem_text);
    std::string l;
    while (std::getline(in, l)) out += "@problem: " + l + "\n";
  }
  if (ctx.goal) out += "@goal: " + print_formula(*ctx.goal) + "\n";
  for (const auto& s : ctx.statements) {
    out += std::to_string(s.id) + " |";
    for (int d = 0; d < s.depth; ++d) out += " |";
    out += " " + std::string(kind_keyword(s.kind));
    if (!s.premises.empty()) {
      out += "[";
      for (std::size_t i = 0; i < s.premises.size(); ++i) out += (i ? ", " : "") + std::to_string(s.premises[i]);
      out += "]";
    }
    out += ": " + s.body_text();
    if (!s.source_text.empty()) out += " // " + s.source_text;
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const Statement& s) {
  return {{"id", s.id},
          {"kind", kind_name(s.kind)},
          {"body", s.has_definition() ? to_json(s.definition()) : to_json(s.formula())},
          {"text", s.body_text()},
          {"premises", s.premises},
          {"source_text", s.source_text},
          {"depth", s.depth}};
}

nlohmann::json to_json(const Context& ctx) {
  nlohmann::json j{{"problem", ctx.problem_text},
                   {"goal", ctx.goal ? to_json(*ctx.goal) : nlohmann::json(nullptr)},
                   {"statements", nlohmann::json::array()}};
  for (const auto& s : ctx.statements) j["statements"].push_back(to_json(s));
  return j;
}

Context context_from_json(const nlohmann::json& j) {
  Context ctx;
  ctx.problem_text = j.value("problem", "");
  if (j.contains("goal") && !j["goal"].is_null()) ctx.goal = formula_from_json(j["goal"]);
  for (const auto& js : j.at("statements")) {
    Statement s;
    s.id = js.at("id").get<StatementId>();
    auto kind = kind_from_keyword(js.at("kind").get<std::string>());
    if (!kind) throw StructureError("unknown statement kind " + js.at("kind").dump());
    s.kind = *kind;
    const auto& body = js.at("body");
    if (body.at("tag") == "Definition") s.body = definition_from_json(body);
    else s.body = formula_from_json(body);
    s.premises = js.at("premises").get<std::vector<StatementId>>();
    s.source_text = js.value("source_text", "");
    s.depth = js.value("depth", 0);
    ctx.statements.push_back(std::move(s));
  }
  return ctx;
}

}  // namespace mathcheck
