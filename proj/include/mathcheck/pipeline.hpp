#pragma once

#include "mathcheck/critic.hpp"
#include "mathcheck/formalizer.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mathcheck {

// Layered "section.key" settings: built-in defaults < config file <
// MATHCHECK_SECTION_KEY environment variables < explicit overrides.
class Settings {
 public:
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  // Throws Error when the config file cannot be read or names an unknown key.
  static Settings load(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env);
  static EnvLookup process_env();

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::string source(const std::string& key) const;  // "default", "config", "env" or "cli"

  SolverConfig solver() const;
  CriticOptions critic() const;
  LlmEndpointConfig endpoint(const std::string& section) const;  // "formalizer" or "generator"

 private:
  struct Entry {
    std::string value;
    std::string source;
  };
  std::map<std::string, Entry> values_;
};

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string build_generation_prompt(const std::string& problem);
// The problem, the previous solution verbatim, then the numbered feedback.
std::string build_feedback_message(const std::string& problem, const std::string& solution,
                                   const std::vector<Feedback>& feedback);

struct RefineIteration {
  std::string prompt;
  std::string solution;
  std::optional<Context> context;
  std::optional<Report> report;
  std::vector<Feedback> feedback;
  std::string formalization_error;
  int formalizer_attempts = 0;
};

struct RefineOutcome {
  std::string final_solution;
  std::optional<Report> final_report;
  std::optional<Context> final_context;
  int iterations = 0;
  int generator_calls = 0;
  int formalizer_calls = 0;
  int feedback_messages = 0;
  std::vector<RefineIteration> trace;
};

RefineOutcome refine(const std::string& problem, ChatEndpoint& generator, ChatEndpoint& formalizer, Critic& critic,
                     int max_iter, int retries);
nlohmann::json to_json(const RefineOutcome& r);

struct BenchFixture {
  std::string name;
  std::string expected_status;
  std::optional<StatementId> expected_first_error;
  std::string status;  // Report status, or "error"
  std::optional<StatementId> first_invalid;
  std::size_t C1 = 0, C2 = 0;
  std::string error;
  double latency_ms = 0;
};

struct BenchSummary {
  std::size_t correct = 0, seeded = 0, skipped = 0;
  double detection_rate = 0, false_alarm_rate = 0, first_error_accuracy = 0;
  double mean_latency_ms = 0;
  double savings_ratio = 0;  // sum C2 / sum C1
  std::vector<BenchFixture> fixtures;
  std::vector<std::string> warnings;
};

// Fixtures are *.ctx files with a *.label.json sidecar holding
// {expected_status, first_error_step}. Throws Error when none are usable.
BenchSummary run_bench(const std::filesystem::path& dir, Critic& critic);
// Timing is left out so the output is reproducible.
nlohmann::json to_json(const BenchSummary& s);
std::string bench_table(const BenchSummary& s);

}  // namespace mathcheck
