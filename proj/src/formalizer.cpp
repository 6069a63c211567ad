#include "mathcheck/formalizer.hpp"

#include "mathcheck/errors.hpp"

#include <fstream>

namespace mathcheck {

namespace {

constexpr const char* kGrammar = R"(SimpleMath grammar (ASCII):
  term     := number | name | name(term, ..., term) | -term
            | term + term | term - term | term * term | term / term | term ^ term
  number   := integer or decimal, e.g. 3, 0.25; fractions are written 1 / 3
  formula  := term REL term | term in SORT | true | false | ~formula
            | formula /\ formula | formula \/ formula | formula -> formula
            | forall x, formula | exists x, formula | forall x : SORT, formula
  REL      := = | != | < | <= | > | >=
  SORT     := NN (naturals) | ZZ (integers) | QQ (rationals) | RR (reals)
  definition := definition(f): SORT, ..., SORT -> SORT
                f(x, ..., y) := term if formula | term if formula | ...
  The exponent of ^ must be an integer literal or a variable.)";

constexpr const char* kKinds = R"(Context lines have the form
  <id> | KIND: body // source sentence
Ids count from 0 without gaps. Each "| " before KIND nests the line one level
deeper inside a subproof. The five kinds are:
  FACT        a given of the problem
  ASSUMPTION  a supposition that opens a subproof one level deeper than the line before
  THEOREM     a known result used without proof
  DEFINITION  a definition(...) of a new function symbol
  CONCLUSION[i, j, ...]  a claim derived from the cited earlier lines (at most 4)
Only CONCLUSION lines cite premises. A conclusion may cite lines at its own
depth or shallower, and from a subproof that has just closed only its
assumption and its last line. Start the reply with "@problem: " followed by
the problem, then one line per step, and nothing else.)";

constexpr const char* kExampleFibonacci = R"(Problem: The sequence f satisfies f(0) = 0, f(1) = 1 and f(n) = f(n-1) + f(n-2). Find f(4).
Solution: f(2) = 1 + 0 = 1 and f(3) = 1 + 1 = 2, so f(4) = 2 + 1 = 3.
Context:
@problem: The sequence f satisfies f(0) = 0, f(1) = 1 and f(n) = f(n-1) + f(n-2). Find f(4).
0 | DEFINITION: definition(f): NN -> NN f(n) := 0 if n = 0 | 1 if n = 1 | f(n - 1) + f(n - 2) if n > 1 // the sequence f
1 | CONCLUSION[0]: f(2) = 1 // f(2) = 1 + 0 = 1
2 | CONCLUSION[0, 1]: f(3) = 2 // f(3) = 1 + 1 = 2
3 | CONCLUSION[0, 1, 2]: f(4) = 3 // so f(4) = 2 + 1 = 3)";

constexpr const char* kExampleAlgebra = R"(Problem: Given x > 0, show that if y > x then y > 0.
Solution: Suppose y > x. Since x > 0 we get y > 0. Hence y > x implies y > 0.
Context:
@problem: Given x > 0, show that if y > x then y > 0.
0 | FACT: x > 0 // x > 0
1 | | ASSUMPTION: y > x // suppose y > x
2 | | CONCLUSION[0, 1]: y > 0 // since x > 0 we get y > 0
3 | CONCLUSION[1, 2]: y > x -> y > 0 // hence y > x implies y > 0)";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

MockEndpoint::MockEndpoint(std::vector<std::string> responses) : responses_(std::move(responses)) {
  if (responses_.empty()) responses_.emplace_back();
}

std::string MockEndpoint::complete(const std::vector<ChatMessage>& messages) {
  std::lock_guard lock(mutex_);
  std::string prompt;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    if (it->role == "user") {
      prompt = it->content;
      break;
    }
  prompts_.push_back(prompt);
  return responses_[std::min(prompts_.size(), responses_.size()) - 1];
}

std::vector<std::string> MockEndpoint::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::size_t MockEndpoint::calls() const {
  std::lock_guard lock(mutex_);
  return prompts_.size();
}

void LlmEndpointConfig::validate() const {
  if (retries < 0) throw Error("retry count must be >= 0");
  if (temperature < 0 || temperature > 2) throw Error("temperature must lie in [0, 2]");
  if (max_tokens <= 0) throw Error("max_tokens must be positive");
  if (timeout_ms <= 0) throw Error("timeout_ms must be positive");
  if (max_concurrent <= 0) throw Error("max_concurrent must be positive");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    throw Error("base_url must start with http:// or https://");
}

std::string build_formalization_prompt(const std::string& problem, const std::string& solution,
                                       const std::string& template_id) {
  if (template_id != "default") throw UnknownTemplate("unknown prompt template '" + template_id + "'");
  if (trim(solution).empty()) throw PromptError("a solution text is required");
  std::string p = "Translate the solution below into a SimpleMath context, one step per line.\n\n";
  p += std::string(kGrammar) + "\n\n" + kKinds + "\n\n";
  p += "Example 1\n" + std::string(kExampleFibonacci) + "\n\n";
  p += "Example 2\n" + std::string(kExampleAlgebra) + "\n\n";
  p += "Now translate this one.\nProblem: " + trim(problem) + "\nSolution: " + trim(solution) + "\nContext:\n";
  return p;
}

std::string extract_context_text(const std::string& reply) {
  std::string text = reply;
  const auto fence = text.find("```");
  if (fence != std::string::npos) {
    auto start = text.find('\n', fence);
    auto end = start == std::string::npos ? std::string::npos : text.find("```", start);
    if (end != std::string::npos) text = text.substr(start + 1, end - start - 1);
  }
  return trim(text) + "\n";
}

FormalizationResult formalize(const FormalizationRequest& request, ChatEndpoint& endpoint, int retries) {
  if (retries < 0) throw Error("retry count must be >= 0");
  const std::string prompt = build_formalization_prompt(request.problem, request.solution, request.template_id);
  FormalizationResult result;
  std::vector<ChatMessage> messages{{"user", prompt}};
  for (int attempt = 1; attempt <= retries + 1; ++attempt) {
    Attempt a;
    a.number = attempt;
    a.prompt = messages.back().content;
    a.response = endpoint.complete(messages);
    try {
      Context ctx = parse_context(extract_context_text(a.response));
      for (const auto& d : validate_context(ctx))
        if (d.severity == Severity::Error) throw StructureError(d.to_string());
      result.context = std::move(ctx);
      result.transcript.push_back(std::move(a));
      result.attempts = attempt;
      return result;
    } catch (const Error& e) {
      a.diagnostic = e.what();
    }
    result.diagnostics.push_back(a.diagnostic);
    messages.push_back({"assistant", a.response});
    messages.push_back({"user", "That context is invalid: " + a.diagnostic +
                                    "\nReply with the corrected context only, in the same format."});
    result.transcript.push_back(std::move(a));
  }
  throw FormalizationFailed(result.diagnostics);
}

nlohmann::json to_json(const Attempt& a) {
  return {{"attempt", a.number},
          {"prompt", a.prompt},
          {"response", a.response},
          {"accepted", a.diagnostic.empty()},
          {"diagnostic", a.diagnostic}};
}

void append_transcript(const std::filesystem::path& path, const std::string& label, const std::vector<Attempt>& attempts) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write transcript " + path.string());
  for (const auto& a : attempts) {
    nlohmann::json j = to_json(a);
    j["label"] = label;
    out << j.dump() << "\n";
  }
}

}  // namespace mathcheck
