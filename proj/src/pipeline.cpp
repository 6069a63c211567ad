#include "mathcheck/pipeline.hpp"

#include "mathcheck/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace mathcheck {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"smt.path", "z3"},
      {"smt.timeout_ms", "5000"},
      {"smt.grace_ms", "1000"},
      {"smt.artifact_dir", ""},
      {"critic.threads", "1"},
      {"critic.seed", "0"},
      {"critic.samples", "200"},
      {"critic.max_iter", "3"},
      {"formalizer.base_url", "https://api.openai.com/v1"},
      {"formalizer.model", "gpt-4o"},
      {"formalizer.api_key_env", "MATHCHECK_API_KEY"},
      {"formalizer.temperature", "0"},
      {"formalizer.max_tokens", "4096"},
      {"formalizer.timeout_ms", "120000"},
      {"formalizer.retries", "2"},
      {"formalizer.max_concurrent", "4"},
      {"formalizer.template", "default"},
      {"formalizer.transcript", ""},
      {"generator.base_url", "https://api.openai.com/v1"},
      {"generator.model", "gpt-4o"},
      {"generator.api_key_env", "MATHCHECK_API_KEY"},
      {"generator.temperature", "0.7"},
      {"generator.max_tokens", "4096"},
      {"generator.timeout_ms", "120000"},
      {"generator.retries", "0"},
      {"generator.max_concurrent", "4"},
  };
  return d;
}

std::string env_name(const std::string& key) {
  std::string s = "MATHCHECK_";
  for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Settings Settings::load(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env) {
  Settings s;
  for (const auto& [k, v] : defaults()) s.values_[k] = {v, "default"};
  if (config_file) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(config_file->string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error("cannot read config " + config_file->string() + ": " + e.message());
    }
    for (const auto& [section, keys] : tree)
      for (const auto& [key, value] : keys) {
        const std::string full = section + "." + key;
        if (!defaults().count(full)) throw Error("unknown config key '" + full + "' in " + config_file->string());
        s.values_[full] = {value.data(), "config"};
      }
  }
  if (env)
    for (const auto& [k, v] : defaults())
      if (auto value = env(env_name(k))) s.values_[k] = {*value, "env"};
  return s;
}

Settings::EnvLookup Settings::process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

void Settings::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw Error("unknown setting '" + key + "'");
  values_[key] = {value, "cli"};
}

std::string Settings::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("unknown setting '" + key + "'");
  return it->second.value;
}

int Settings::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error("setting " + key + " must be an integer, got '" + v + "'");
}

double Settings::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error("setting " + key + " must be a number, got '" + v + "'");
}

std::string Settings::source(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? "" : it->second.source;
}

SolverConfig Settings::solver() const {
  SolverConfig c;
  c.path = get("smt.path");
  c.timeout_ms = get_int("smt.timeout_ms");
  c.grace_ms = get_int("smt.grace_ms");
  if (!get("smt.artifact_dir").empty()) c.artifact_dir = get("smt.artifact_dir");
  if (c.timeout_ms <= 0) throw Error("smt.timeout_ms must be positive");
  return c;
}

CriticOptions Settings::critic() const {
  CriticOptions o;
  o.smt = solver();
  o.threads = static_cast<unsigned>(std::max(1, get_int("critic.threads")));
  o.cas.seed = static_cast<std::uint64_t>(get_int("critic.seed"));
  o.cas.samples = get_int("critic.samples");
  return o;
}

LlmEndpointConfig Settings::endpoint(const std::string& section) const {
  LlmEndpointConfig c;
  c.base_url = get(section + ".base_url");
  c.model = get(section + ".model");
  c.api_key_env = get(section + ".api_key_env");
  c.temperature = get_double(section + ".temperature");
  c.max_tokens = get_int(section + ".max_tokens");
  c.timeout_ms = get_int(section + ".timeout_ms");
  c.retries = get_int(section + ".retries");
  c.max_concurrent = get_int(section + ".max_concurrent");
  c.validate();
  return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto temp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + path.string());
  }
  std::filesystem::rename(temp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string build_generation_prompt(const std::string& problem) {
  return "Solve the following problem. Write the solution as short numbered steps, one claim per step, "
         "and state the final answer.\n\nProblem: " +
         problem + "\n";
}

std::string build_feedback_message(const std::string& problem, const std::string& solution,
                                   const std::vector<Feedback>& feedback) {
  std::string m = "Problem: " + problem + "\n\nYour previous solution:\n" + solution + "\n\n";
  m += "A checker found these problems:\n";
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    std::string text = feedback[i].text;
    while (!text.empty() && text.back() == '\n') text.pop_back();
    m += std::to_string(i + 1) + ". " + text + "\n";
  }
  m += "\nWrite a corrected solution in the same format.\n";
  return m;
}

RefineOutcome refine(const std::string& problem, ChatEndpoint& generator, ChatEndpoint& formalizer, Critic& critic,
                     int max_iter, int retries) {
  if (max_iter < 1) throw Error("max_iter must be at least 1");
  RefineOutcome out;
  std::string prompt = build_generation_prompt(problem);
  for (int iter = 1; iter <= max_iter; ++iter) {
    RefineIteration it;
    it.prompt = prompt;
    it.solution = generator.complete({{"user", prompt}});
    ++out.generator_calls;
    try {
      FormalizationResult f = formalize({problem, it.solution, "default"}, formalizer, retries);
      it.formalizer_attempts = f.attempts;
      it.context = f.context;
      it.report = verify_context(*it.context, critic);
      it.feedback = make_feedback(*it.report, *it.context);
    } catch (const FormalizationFailed& e) {
      it.formalizer_attempts = static_cast<int>(e.diagnostics().size());
      it.formalization_error = e.what();
    }
    out.formalizer_calls += it.formalizer_attempts;
    out.iterations = iter;
    out.final_solution = it.solution;
    out.final_context = it.context;
    out.final_report = it.report;
    const bool done = it.report && it.report->status == Report::Status::AllValid;

    std::vector<Feedback> message = it.feedback;
    if (message.empty()) {
      Feedback generic;
      generic.text = it.context ? "Some steps could not be checked. Justify each step with an explicit calculation."
                                : "The solution could not be read step by step. Write every step as one explicit "
                                  "equation or inequality.";
      message.push_back(generic);
    }
    out.trace.push_back(std::move(it));
    if (done || iter == max_iter) break;
    prompt = build_feedback_message(problem, out.final_solution, message);
    ++out.feedback_messages;
  }
  return out;
}

nlohmann::json to_json(const RefineOutcome& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& it : r.trace) {
    nlohmann::json feedback = nlohmann::json::array();
    for (const auto& f : it.feedback) feedback.push_back(to_json(f));
    nlohmann::json e{{"prompt", it.prompt},
                     {"solution", it.solution},
                     {"formalizer_attempts", it.formalizer_attempts},
                     {"feedback", feedback}};
    if (it.context) e["context"] = print_context(*it.context);
    e["status"] = it.report ? nlohmann::json(status_name(it.report->status)) : nlohmann::json("FormalizationFailed");
    if (!it.formalization_error.empty()) e["formalization_error"] = it.formalization_error;
    trace.push_back(std::move(e));
  }
  nlohmann::json j{{"schema", "mathcheck.refine/1"},
                   {"iterations", r.iterations},
                   {"generator_calls", r.generator_calls},
                   {"formalizer_calls", r.formalizer_calls},
                   {"feedback_messages", r.feedback_messages},
                   {"final_solution", r.final_solution},
                   {"trace", trace}};
  j["final_status"] = r.final_report ? nlohmann::json(status_name(r.final_report->status))
                                     : nlohmann::json("FormalizationFailed");
  if (r.final_report && r.final_context) j["final_report"] = to_json(*r.final_report, *r.final_context);
  return j;
}

BenchSummary run_bench(const std::filesystem::path& dir, Critic& critic) {
  if (!std::filesystem::is_directory(dir)) throw Error("corpus directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".ctx") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  BenchSummary s;
  std::size_t detected = 0, false_alarms = 0, located = 0, c1 = 0, c2 = 0;
  double latency = 0;
  for (const auto& path : files) {
    BenchFixture f;
    f.name = path.stem().string();
    auto label_path = path;
    label_path.replace_extension(".label.json");
    try {
      auto label = nlohmann::json::parse(read_file(label_path));
      f.expected_status = label.at("expected_status").get<std::string>();
      if (f.expected_status != "AllValid" && f.expected_status != "HasInvalid")
        throw Error("expected_status must be AllValid or HasInvalid");
      if (label.contains("first_error_step") && !label["first_error_step"].is_null())
        f.expected_first_error = label["first_error_step"].get<StatementId>();
      if (f.expected_status == "HasInvalid" && !f.expected_first_error)
        throw Error("a HasInvalid label needs first_error_step");
    } catch (const std::exception& e) {
      s.warnings.push_back(f.name + ": bad label: " + e.what());
      ++s.skipped;
      continue;
    }
    Context ctx;
    try {
      ctx = parse_context(read_file(path));
    } catch (const Error& e) {
      s.warnings.push_back(f.name + ": " + e.what());
      ++s.skipped;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Report r = verify_context(ctx, critic);
    f.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    latency += f.latency_ms;
    f.status = std::string(status_name(r.status));
    f.first_invalid = r.first_invalid;
    f.C1 = r.cost.C1;
    f.C2 = r.cost.C2;
    c1 += f.C1;
    c2 += f.C2;
    if (f.expected_status == "HasInvalid") {
      ++s.seeded;
      if (r.status == Report::Status::HasInvalid) ++detected;
      if (r.first_invalid == f.expected_first_error) ++located;
    } else {
      ++s.correct;
      if (r.status == Report::Status::HasInvalid) ++false_alarms;
    }
    s.fixtures.push_back(std::move(f));
  }
  if (s.fixtures.empty()) throw Error("no usable fixtures in " + dir.string());
  s.detection_rate = s.seeded ? static_cast<double>(detected) / s.seeded : 0;
  s.first_error_accuracy = s.seeded ? static_cast<double>(located) / s.seeded : 0;
  s.false_alarm_rate = s.correct ? static_cast<double>(false_alarms) / s.correct : 0;
  s.mean_latency_ms = latency / s.fixtures.size();
  s.savings_ratio = c1 ? static_cast<double>(c2) / c1 : 0;
  return s;
}

nlohmann::json to_json(const BenchSummary& s) {
  nlohmann::json fixtures = nlohmann::json::array();
  for (const auto& f : s.fixtures) {
    auto id = [](const std::optional<StatementId>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    fixtures.push_back({{"name", f.name},
                        {"expected_status", f.expected_status},
                        {"expected_first_error", id(f.expected_first_error)},
                        {"status", f.status},
                        {"first_invalid", id(f.first_invalid)},
                        {"C1", f.C1},
                        {"C2", f.C2}});
  }
  return {{"schema", "mathcheck.bench/1"},
          {"correct", s.correct},
          {"seeded", s.seeded},
          {"skipped", s.skipped},
          {"detection_rate", s.detection_rate},
          {"false_alarm_rate", s.false_alarm_rate},
          {"first_error_accuracy", s.first_error_accuracy},
          {"savings_ratio", s.savings_ratio},
          {"fixtures", fixtures},
          {"warnings", s.warnings}};
}

std::string bench_table(const BenchSummary& s) {
  std::ostringstream o;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-12s %-12s %6s %6s %6s %9s\n", "fixture", "expected", "status", "first",
                "C1", "C2", "ms");
  o << line;
  for (const auto& f : s.fixtures) {
    std::snprintf(line, sizeof line, "%-28s %-12s %-12s %6s %6zu %6zu %9.1f\n", f.name.c_str(),
                  f.expected_status.c_str(), f.status.c_str(),
                  f.first_invalid ? std::to_string(*f.first_invalid).c_str() : "-", f.C1, f.C2, f.latency_ms);
    o << line;
  }
  std::snprintf(line, sizeof line,
                "\ncorrect %zu  seeded %zu  skipped %zu\ndetection %.3f  false alarm %.3f  first-error accuracy %.3f\n"
                "mean latency %.1f ms  savings ratio C2/C1 %.3f\n",
                s.correct, s.seeded, s.skipped, s.detection_rate, s.false_alarm_rate, s.first_error_accuracy,
                s.mean_latency_ms, s.savings_ratio);
  o << line;
  return o.str();
}

}  // namespace mathcheck
