#pragma once

#include "mathcheck/eval.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace mathcheck {

enum class VerdictKind { Valid, Invalid, Unknown };

std::string_view verdict_kind_name(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  // "cas", "smt" or "arith"; empty when no tool decided.
  std::string tool;
  std::string reason;
  // Invalid: an assignment under which the premises hold and the conclusion fails.
  std::optional<Valuation> counterexample;
  // Whether the counterexample was re-checked by exact evaluation.
  bool replayed = false;
  std::string raw_model;

  static Verdict valid(std::string tool, std::string reason = {});
  static Verdict unknown(std::string tool, std::string reason);
  static Verdict invalid(std::string tool, std::string reason, std::optional<Valuation> counterexample = {});
};

std::string describe_valuation(const Valuation& v);
nlohmann::json to_json(const Verdict& v);

}  // namespace mathcheck
