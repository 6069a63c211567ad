#include "mathcheck/critic.hpp"

#include "mathcheck/errors.hpp"
#include "mathcheck/eval.hpp"
#include "mathcheck/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace mathcheck {

namespace {

void top_conjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == FormulaKind::And) {
    for (const auto& s : f.subs()) top_conjuncts(s, out);
  } else {
    out.push_back(f);
  }
}

bool has_quantifier(const Formula& f) {
  if (f.is_quantifier()) return true;
  for (const auto& s : f.subs())
    if (has_quantifier(s)) return true;
  return false;
}

bool has_apply(const Term& t) {
  if (t.kind() == TermKind::Apply) return true;
  for (const auto& a : t.args())
    if (has_apply(a)) return true;
  return false;
}

bool has_apply(const Formula& f) {
  for (const auto& t : f.terms())
    if (has_apply(t)) return true;
  for (const auto& s : f.subs())
    if (has_apply(s)) return true;
  return false;
}

bool compare(Rel rel, const Rational& a, const Rational& b) {
  switch (rel) {
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Gt: return a > b;
    case Rel::Ge: return a >= b;
  }
  return false;
}

// Triangular substitutions v := t read off premise equations, where no t
// mentions an eliminated variable.
using Substitutions = std::vector<std::pair<std::string, Term>>;

Substitutions equations_of(const std::vector<Formula>& premises) {
  Substitutions subs;
  auto apply_all = [&](Term t) {
    for (const auto& [v, r] : subs) t = substitute(t, v, r);
    return t;
  };
  auto eliminated = [&](const std::string& v) {
    return std::any_of(subs.begin(), subs.end(), [&](const auto& s) { return s.first == v; });
  };
  for (const auto& p : premises) {
    std::vector<Formula> parts;
    top_conjuncts(p, parts);
    for (const auto& c : parts) {
      if (c.kind() != FormulaKind::Compare || c.rel() != Rel::Eq) continue;
      for (int side = 0; side < 2; ++side) {
        const Term& lhs = c.terms()[side];
        if (!lhs.is_variable() || eliminated(lhs.name())) continue;
        Term rhs = apply_all(c.terms()[1 - side]);
        if (free_variables(rhs).count(lhs.name())) continue;
        for (auto& s : subs) s.second = substitute(s.second, lhs.name(), rhs);
        subs.emplace_back(lhs.name(), rhs);
        break;
      }
    }
  }
  return subs;
}

Formula apply_substitutions(Formula f, const Substitutions& subs) {
  for (const auto& [v, t] : subs) f = substitute(f, v, t);
  return f;
}

// Completes `point` with the eliminated variables; false when one cannot be evaluated.
bool extend_point(Valuation& point, const Substitutions& subs, std::span<const Definition> defs) {
  for (const auto& [v, t] : subs) {
    try {
      point.vars[v] = eval_exact(t, point, defs);
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

// True when every premise is known to hold at `point`.
bool premises_hold(const ResolvedJudgment& j, const Valuation& point) {
  try {
    Evaluator ev(point, j.definitions);
    for (const auto& p : j.premises)
      if (!ev.holds(p)) return false;
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string describe_sides(const Formula& c, const Valuation& point, std::span<const Definition> defs) {
  std::string s;
  for (const auto& side : c.terms()) {
    if (side.is_literal()) continue;
    s += (s.empty() ? "" : ", ") + print_term(side) + " = " + to_string(eval_exact(side, point, defs));
  }
  return s;
}

}  // namespace

std::string_view route_name(Route r) {
  switch (r) {
    case Route::Arithmetic: return "Arithmetic";
    case Route::Algebraic: return "Algebraic";
    case Route::Logical: return "Logical";
  }
  return "Logical";
}

ResolvedJudgment resolve(const Judgment& j, const Context& ctx) {
  ResolvedJudgment r;
  r.id = j.conclusion;
  r.conclusion = ctx.at(j.conclusion).formula();
  std::vector<StatementId> defs = j.definitions;
  for (auto p : j.premises) {
    if (ctx.at(p).has_definition()) defs.push_back(p);
    else r.premises.push_back(ctx.at(p).formula());
  }
  std::sort(defs.begin(), defs.end());
  defs.erase(std::unique(defs.begin(), defs.end()), defs.end());
  for (auto d : defs) r.definitions.push_back(ctx.at(d).definition());
  return r;
}

Route classify_judgment(const ResolvedJudgment& j) {
  const Formula& c = j.conclusion;
  if (c.kind() != FormulaKind::Compare) return Route::Logical;
  if (free_variables(c).empty()) return Route::Arithmetic;
  if (c.rel() != Rel::Eq) return Route::Logical;
  for (const auto& p : j.premises) {
    std::vector<Formula> parts;
    top_conjuncts(p, parts);
    for (const auto& part : parts) {
      const bool equation = part.kind() == FormulaKind::Compare && part.rel() == Rel::Eq;
      if (!equation && part.kind() != FormulaKind::Member) return Route::Logical;
    }
  }
  return Route::Algebraic;
}

Critic::Critic(CriticOptions options) : options_(std::move(options)), smt_(options_.smt) {}

Verdict Critic::cas_leg(const ResolvedJudgment& j) {
  const Substitutions subs = equations_of(j.premises);
  const Formula c = apply_substitutions(j.conclusion, subs);
  if (c.kind() != FormulaKind::Compare) return Verdict::unknown("cas", "conclusion is not a single comparison");
  const Term& lhs = c.terms()[0];
  const Term& rhs = c.terms()[1];
  try {
    if (c.rel() != Rel::Eq) {
      NormalForm d = normalize(Term::sub(lhs, rhs));
      if (!d.num.is_constant() || !d.den.is_constant() || d.has_opaque_atoms())
        return Verdict::unknown("cas", "difference of the sides is not constant");
      const Rational value = d.num.coefficient({}) / d.den.coefficient({});
      if (compare(c.rel(), value, 0))
        return Verdict::valid("cas", "the sides differ by the constant " + to_string(value));
      return Verdict::unknown("cas", "the sides differ by the constant " + to_string(value));
    }
    EquivVerdict e = equiv(lhs, rhs, options_.cas);
    if (e.kind == EquivVerdict::Kind::Equal)
      return Verdict::valid("cas", subs.empty() ? "both sides have the same normal form"
                                                : "both sides agree after substituting the premise equations");
    if (e.kind == EquivVerdict::Kind::Unknown) return Verdict::unknown("cas", e.reason);
    if (!e.witness.functions.empty() || has_apply(c))
      return Verdict::unknown("cas", "sides differ only through uninterpreted function values");
    Valuation point;
    point.vars = e.witness.vars;
    for (const auto& v : free_variables(j.conclusion))
      if (!point.vars.count(v) && std::none_of(subs.begin(), subs.end(), [&](const auto& s) { return s.first == v; }))
        point.vars[v] = 0;
    for (const auto& p : j.premises)
      for (const auto& v : free_variables(p))
        if (!point.vars.count(v) &&
            std::none_of(subs.begin(), subs.end(), [&](const auto& s) { return s.first == v; }))
          point.vars[v] = 0;
    if (!extend_point(point, subs, j.definitions) || !premises_hold(j, point) ||
        eval_formula(j.conclusion, point, j.definitions))
      return Verdict::unknown("cas", "sides differ but no point satisfying the premises was found");
    return Verdict::invalid("cas",
                            "premises hold but conclusion fails at " + describe_valuation(point) + " (" +
                                describe_sides(j.conclusion, point, j.definitions) + ")",
                            point);
  } catch (const Error& e) {
    return Verdict::unknown("cas", e.what());
  }
}

Verdict Critic::exact_leg(const ResolvedJudgment& j) {
  const Substitutions subs = equations_of(j.premises);
  const Formula c = apply_substitutions(j.conclusion, subs);
  if (!free_variables(c).empty() || has_quantifier(c))
    return Verdict::unknown("exact", "conclusion is not ground after substituting premise equations");
  try {
    Valuation point;
    if (!extend_point(point, subs, j.definitions)) return Verdict::unknown("exact", "premise values are not ground");
    for (auto it = point.vars.begin(); it != point.vars.end();) {
      if (free_variables(j.conclusion).count(it->first)) ++it;
      else it = point.vars.erase(it);
    }
    if (eval_formula(c, {}, j.definitions)) return Verdict::valid("exact", "the claim evaluates to true");
    Valuation check = point;
    for (const auto& [v, t] : subs)
      if (free_variables(t).empty()) check.vars[v] = eval_exact(t, {}, j.definitions);
    if (!premises_hold(j, check))
      return Verdict::unknown("exact", "the claim evaluates to false but the premises could not be confirmed");
    std::string reason = j.conclusion.kind() == FormulaKind::Compare
                             ? describe_sides(j.conclusion, check, j.definitions)
                             : std::string();
    if (!point.vars.empty()) reason = "with " + describe_valuation(point) + (reason.empty() ? "" : ": " + reason);
    reason += (reason.empty() ? "" : ", so ") + print_formula(j.conclusion) + " is false";
    Verdict v = Verdict::invalid("exact", reason, std::nullopt);
    if (!point.vars.empty()) {
      v.counterexample = point;
      v.replayed = true;
    }
    return v;
  } catch (const Error& e) {
    return Verdict::unknown("exact", e.what());
  }
}

Verdict Critic::smt_leg(const ResolvedJudgment& j) {
  EntailmentQuery q;
  q.premises = j.premises;
  q.conclusion = j.conclusion;
  q.definitions = j.definitions;
  try {
    return smt_.check(q);
  } catch (const Error& e) {
    return Verdict::unknown("smt", e.what());
  }
}

Verdict Critic::verify_judgment(const ResolvedJudgment& j) {
  using Leg = Verdict (Critic::*)(const ResolvedJudgment&);
  std::vector<Leg> order;
  if (classify_judgment(j) == Route::Logical) order = {&Critic::smt_leg, &Critic::cas_leg};
  else order = {&Critic::cas_leg, &Critic::exact_leg, &Critic::smt_leg};
  std::string reasons;
  for (Leg leg : order) {
    Verdict v = (this->*leg)(j);
    if (v.kind != VerdictKind::Unknown) return v;
    reasons += (reasons.empty() ? "" : "; ") + v.tool + ": " + v.reason;
  }
  return Verdict::unknown("critic", reasons);
}

std::string_view status_name(Report::Status s) {
  switch (s) {
    case Report::Status::AllValid: return "AllValid";
    case Report::Status::HasInvalid: return "HasInvalid";
    case Report::Status::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

int exit_status(Report::Status s) {
  switch (s) {
    case Report::Status::AllValid: return 0;
    case Report::Status::HasInvalid: return 1;
    case Report::Status::Inconclusive: return 2;
  }
  return 2;
}

Report verify_context(const Context& ctx, Critic& critic) {
  const SolutionGraph g = build_graph(ctx);
  const std::vector<Judgment> judgments = extract_judgments(g, ctx);
  Report report;
  report.cost = cost_metrics(g);
  report.judgments.resize(judgments.size());

  std::vector<ResolvedJudgment> resolved;
  for (const auto& j : judgments) resolved.push_back(resolve(j, ctx));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < judgments.size(); i = next++) {
      JudgmentResult& r = report.judgments[i];
      r.id = judgments[i].conclusion;
      r.premises = judgments[i].premises;
      r.definitions = judgments[i].definitions;
      r.route = classify_judgment(resolved[i]);
      try {
        r.verdict = critic.verify_judgment(resolved[i]);
      } catch (const std::exception& e) {
        r.verdict = Verdict::unknown("critic", e.what());
      }
      if (critic.options().explainer && r.verdict.kind != VerdictKind::Unknown)
        r.explanation = critic.options().explainer(resolved[i], r.verdict);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(critic.options().threads, judgments.size()));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  bool unknown = false;
  for (const auto& r : report.judgments) {
    for (auto p : r.premises)
      if (!ctx.at(p).has_definition()) ++report.premises_submitted;
    if (r.verdict.kind == VerdictKind::Invalid && !report.first_invalid) report.first_invalid = r.id;
    if (r.verdict.kind == VerdictKind::Unknown) unknown = true;
  }
  report.status = report.first_invalid ? Report::Status::HasInvalid
                  : unknown            ? Report::Status::Inconclusive
                                       : Report::Status::AllValid;

  for (const auto& j : judgments) {
    const bool strengthened = std::any_of(j.premises.begin(), j.premises.end(),
                                          [&](StatementId p) { return ctx.at(p).kind == StatementKind::Conclusion; });
    if (!strengthened) continue;
    Corollary c;
    c.conclusion = j.conclusion;
    const auto fp = foundational_premises(g, j.conclusion);
    c.premises.assign(fp.begin(), fp.end());
    std::string lhs;
    for (auto p : c.premises) lhs += (lhs.empty() ? "" : ", ") + ctx.at(p).body_text();
    c.text = "{" + lhs + "} |- " + ctx.at(j.conclusion).body_text();
    report.corollaries.push_back(std::move(c));
  }
  for (const auto& s : ctx.statements)
    if (s.kind == StatementKind::Theorem) report.trusted.push_back(s.id);
  return report;
}

nlohmann::json to_json(const Report& r, const Context& ctx) {
  nlohmann::json judgments = nlohmann::json::array();
  for (const auto& j : r.judgments) {
    nlohmann::json e{{"id", j.id},
                     {"source", ctx.at(j.id).source_text},
                     {"formula", ctx.at(j.id).body_text()},
                     {"route", route_name(j.route)},
                     {"premises", j.premises},
                     {"definitions", j.definitions},
                     {"verdict", to_json(j.verdict)}};
    if (!j.explanation.empty()) e["explanation"] = j.explanation;
    judgments.push_back(std::move(e));
  }
  nlohmann::json corollaries = nlohmann::json::array();
  for (const auto& c : r.corollaries)
    corollaries.push_back({{"conclusion", c.conclusion}, {"premises", c.premises}, {"text", c.text}});
  return {{"schema", "mathcheck.report/1"},
          {"status", status_name(r.status)},
          {"first_invalid", r.first_invalid ? nlohmann::json(*r.first_invalid) : nlohmann::json(nullptr)},
          {"judgments", judgments},
          {"cost", to_json(r.cost)},
          {"premises_submitted", r.premises_submitted},
          {"corollaries", corollaries},
          {"trusted", r.trusted}};
}

std::vector<Feedback> make_feedback(const Report& r, const Context& ctx) {
  std::vector<Feedback> out;
  for (const auto& j : r.judgments) {
    if (j.verdict.kind != VerdictKind::Invalid) continue;
    Feedback f;
    f.id = j.id;
    f.formula = ctx.at(j.id).body_text();
    f.reason = j.verdict.reason;
    if (j.verdict.counterexample) f.counterexample = describe_valuation(*j.verdict.counterexample);
    const std::string& source = ctx.at(j.id).source_text;
    f.text = "Step " + std::to_string(j.id) + ": \"" + (source.empty() ? f.formula : source) + "\"\n";
    f.text += "Formal claim: " + f.formula + "\n";
    f.text += "Problem: " + f.reason + "\n";
    if (f.counterexample) f.text += "Counterexample: " + *f.counterexample + "\n";
    f.text += "Fix this step and any later step that relies on it.\n";
    out.push_back(std::move(f));
  }
  return out;
}

nlohmann::json to_json(const Feedback& f) {
  nlohmann::json j{{"id", f.id}, {"formula", f.formula}, {"reason", f.reason}, {"text", f.text}};
  j["counterexample"] = f.counterexample ? nlohmann::json(*f.counterexample) : nlohmann::json(nullptr);
  return j;
}

std::optional<std::size_t> select_solution(const std::vector<std::pair<Context, Report>>& candidates) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].second.status != Report::Status::AllValid) continue;
    if (!best || candidates[i].first.size() < candidates[*best].first.size()) best = i;
  }
  return best;
}

}  // namespace mathcheck
