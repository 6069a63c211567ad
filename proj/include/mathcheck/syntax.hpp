#pragma once

#include "mathcheck/ast.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <string_view>

namespace mathcheck {

// Concrete SimpleMath grammar (ASCII). Binding strength, tightest first:
//   ^  >  unary -  >  * /  >  + -  >  = != < <= > >= in  >  ~  >  /\  >  \/  >  ->
// `->` and `^` associate to the right, everything else to the left.
// Quantifiers are written `forall n, body` or `forall n : NN, body` and extend
// as far right as possible.
Term parse_term(std::string_view text);
Formula parse_formula(std::string_view text);
// definition(f): NN -> NN  f(n) := f(n-1) + f(n-2) if n >= 3 | 1 if n = 2 | 1 if n = 1
Definition parse_definition(std::string_view text);

std::string print_term(const Term& t);
std::string print_formula(const Formula& f);
std::string print_definition(const Definition& d);

inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << print_term(t); }
inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << print_formula(f); }

// Tagged-tree JSON: {"tag": "...", ...children}.
nlohmann::json to_json(const Term& t);
nlohmann::json to_json(const Formula& f);
nlohmann::json to_json(const Definition& d);
Term term_from_json(const nlohmann::json& j);
Formula formula_from_json(const nlohmann::json& j);
Definition definition_from_json(const nlohmann::json& j);

}  // namespace mathcheck
