#include "mathcheck/verdict.hpp"

namespace mathcheck {

std::string_view verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Valid: return "Valid";
    case VerdictKind::Invalid: return "Invalid";
    case VerdictKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

Verdict Verdict::valid(std::string tool, std::string reason) {
  return {VerdictKind::Valid, std::move(tool), std::move(reason), std::nullopt, false, {}};
}

Verdict Verdict::unknown(std::string tool, std::string reason) {
  return {VerdictKind::Unknown, std::move(tool), std::move(reason), std::nullopt, false, {}};
}

Verdict Verdict::invalid(std::string tool, std::string reason, std::optional<Valuation> counterexample) {
  const bool replayed = counterexample.has_value();
  return {VerdictKind::Invalid, std::move(tool), std::move(reason), std::move(counterexample), replayed, {}};
}

std::string describe_valuation(const Valuation& v) {
  std::string s;
  for (const auto& [name, value] : v.vars) s += (s.empty() ? "" : ", ") + name + " = " + to_string(value);
  for (const auto& [key, value] : v.functions) s += (s.empty() ? "" : ", ") + print_function_value(key, value);
  return s.empty() ? "any point" : s;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"verdict", verdict_kind_name(v.kind)}, {"tool", v.tool}, {"reason", v.reason}};
  if (v.counterexample) {
    nlohmann::json vars = nlohmann::json::object(), fns = nlohmann::json::object();
    for (const auto& [name, value] : v.counterexample->vars) vars[name] = to_string(value);
    for (const auto& [key, value] : v.counterexample->functions) {
      std::string k = print_function_value(key, value);
      fns[k.substr(0, k.find(" = "))] = to_string(value);
    }
    j["counterexample"] = {{"variables", vars}, {"functions", fns}, {"replayed", v.replayed}};
  }
  if (!v.raw_model.empty()) j["raw_model"] = v.raw_model;
  return j;
}

}  // namespace mathcheck
