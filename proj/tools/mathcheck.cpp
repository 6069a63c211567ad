#include "mathcheck/critic.hpp"
#include "mathcheck/errors.hpp"
#include "mathcheck/formalizer.hpp"
#include "mathcheck/graph.hpp"
#include "mathcheck/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace mathcheck;

namespace {

constexpr int kMissingFile = 3;
constexpr int kBadInput = 4;
constexpr int kBadConfig = 5;
constexpr int kTransport = 6;

struct MissingFile : Error {
  using Error::Error;
};
struct BadConfig : Error {
  using Error::Error;
};

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> solver_path;
  std::optional<int> timeout_ms;
  std::optional<int> max_iter;
  std::optional<int> seed;
  std::optional<int> threads;
  std::optional<std::string> report_out;
  bool mock = false;
};

std::string load(const std::string& path) {
  if (!fs::exists(path)) throw MissingFile("no such file: " + path);
  return read_file(path);
}

Settings settings_from(const Options& o) {
  if (o.config && !fs::exists(*o.config)) throw MissingFile("no such config file: " + *o.config);
  try {
    Settings s = Settings::load(o.config ? std::optional<fs::path>(*o.config) : std::nullopt, Settings::process_env());
    if (o.solver_path) s.set("smt.path", *o.solver_path);
    if (o.timeout_ms) s.set("smt.timeout_ms", std::to_string(*o.timeout_ms));
    if (o.max_iter) s.set("critic.max_iter", std::to_string(*o.max_iter));
    if (o.seed) s.set("critic.seed", std::to_string(*o.seed));
    if (o.threads) s.set("critic.threads", std::to_string(*o.threads));
    s.critic();
    return s;
  } catch (const MissingFile&) {
    throw;
  } catch (const Error& e) {
    throw BadConfig(e.what());
  }
}

void emit(const Options& o, const std::string& text) {
  if (o.report_out) write_file_atomic(*o.report_out, text);
  else std::cout << text;
}

void print_report(const Report& r, const Context& ctx) {
  for (const auto& j : r.judgments) {
    std::cout << "step " << j.id << ": " << verdict_kind_name(j.verdict.kind) << " (" << j.verdict.tool << ")";
    if (j.verdict.kind != VerdictKind::Valid) std::cout << ": " << j.verdict.reason;
    std::cout << "\n";
  }
  for (const auto& c : r.corollaries) std::cout << "corollary for step " << c.conclusion << ": " << c.text << "\n";
  std::cout << "status: " << status_name(r.status);
  if (r.first_invalid) std::cout << " at step " << *r.first_invalid;
  std::cout << "\n";
  (void)ctx;
}

int verify_and_report(const Context& ctx, const Settings& s, const Options& o) {
  Critic critic(s.critic());
  Report r = verify_context(ctx, critic);
  print_report(r, ctx);
  if (o.report_out) write_file_atomic(*o.report_out, to_json(r, ctx).dump(2) + "\n");
  return exit_status(r.status);
}

std::unique_ptr<ChatEndpoint> endpoint_for(const std::string& section, const nlohmann::json& problem,
                                           const Settings& s, const Options& o) {
  if (o.mock) {
    if (!problem.contains(section)) throw Error("--mock needs a \"" + section + "\" response list in the problem file");
    return std::make_unique<MockEndpoint>(problem[section].get<std::vector<std::string>>());
  }
  return std::make_unique<HttpChatEndpoint>(s.endpoint(section));
}

nlohmann::json load_problem(const std::string& path) {
  try {
    return nlohmann::json::parse(load(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

int cmd_verify(const std::string& path, const Options& o) {
  Settings s = settings_from(o);
  return verify_and_report(parse_context(load(path)), s, o);
}

int cmd_formalize(const std::string& path, const std::optional<std::string>& context_out, const Options& o) {
  Settings s = settings_from(o);
  auto problem = load_problem(path);
  auto endpoint = endpoint_for("formalizer", problem, s, o);
  FormalizationRequest req{problem.value("problem", ""), problem.value("solution", ""), s.get("formalizer.template")};
  std::vector<Attempt> attempts;
  try {
    FormalizationResult f = formalize(req, *endpoint, s.get_int("formalizer.retries"));
    if (!s.get("formalizer.transcript").empty()) append_transcript(s.get("formalizer.transcript"), path, f.transcript);
    const std::string text = print_context(f.context);
    if (context_out) write_file_atomic(*context_out, text);
    else std::cout << text;
    std::cout << "formalized in " << f.attempts << " attempt(s)\n";
    return verify_and_report(f.context, s, o);
  } catch (const FormalizationFailed& e) {
    std::cerr << "mathcheck: " << e.what() << "\n";
    return kBadInput;
  }
}

int cmd_refine(const std::string& path, const Options& o) {
  Settings s = settings_from(o);
  auto problem = load_problem(path);
  auto generator = endpoint_for("generator", problem, s, o);
  auto formalizer = endpoint_for("formalizer", problem, s, o);
  Critic critic(s.critic());
  const int max_iter = s.get_int("critic.max_iter");
  if (max_iter < 1) throw BadConfig("max_iter must be at least 1");
  RefineOutcome r = refine(problem.value("problem", ""), *generator, *formalizer, critic, max_iter,
                           s.get_int("formalizer.retries"));
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& it = r.trace[i];
    std::cout << "iteration " << i + 1 << ": "
              << (it.report ? std::string(status_name(it.report->status)) : "FormalizationFailed");
    if (!it.feedback.empty()) std::cout << ", " << it.feedback.size() << " feedback item(s)";
    std::cout << "\n";
  }
  std::cout << "iterations: " << r.iterations << "\nfeedback messages: " << r.feedback_messages << "\n";
  if (o.report_out) write_file_atomic(*o.report_out, to_json(r).dump(2) + "\n");
  return r.final_report ? exit_status(r.final_report->status) : 2;
}

int cmd_select(const std::vector<std::string>& paths, const Options& o) {
  Settings s = settings_from(o);
  Critic critic(s.critic());
  std::vector<std::pair<Context, Report>> candidates;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : paths) {
    Context ctx;
    Report r;
    std::string error;
    try {
      ctx = parse_context(load(p));
      r = verify_context(ctx, critic);
    } catch (const Error& e) {
      error = e.what();
      r = Report{};
      r.status = Report::Status::Inconclusive;
    }
    nlohmann::json row{{"path", p}, {"statements", ctx.size()}, {"status", error.empty() ? status_name(r.status) : "error"}};
    if (!error.empty()) row["error"] = error;
    std::cout << candidates.size() << " " << p << ": " << row["status"].get<std::string>() << " (" << ctx.size()
              << " statements)\n";
    rows.push_back(row);
    candidates.emplace_back(std::move(ctx), std::move(r));
  }
  auto chosen = select_solution(candidates);
  if (chosen) std::cout << "selected: " << *chosen << " " << paths[*chosen] << "\n";
  else std::cout << "selected: none\n";
  if (o.report_out) {
    nlohmann::json j{{"schema", "mathcheck.select/1"}, {"candidates", rows}};
    j["selected"] = chosen ? nlohmann::json(*chosen) : nlohmann::json(nullptr);
    write_file_atomic(*o.report_out, j.dump(2) + "\n");
  }
  return chosen ? 0 : 2;
}

int cmd_bench(const std::string& dir, const Options& o) {
  Settings s = settings_from(o);
  if (!fs::exists(dir)) throw MissingFile("no such directory: " + dir);
  Critic critic(s.critic());
  BenchSummary summary = run_bench(dir, critic);
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << bench_table(summary);
  if (o.report_out) write_file_atomic(*o.report_out, to_json(summary).dump(2) + "\n");
  return 0;
}

int cmd_graph(const std::string& path, const Options& o) {
  Context ctx = parse_context(load(path));
  emit(o, to_dot(build_graph(ctx)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-level checker for formalized math solutions"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "INI configuration file");
  app.add_option("--solver-path", o.solver_path, "SMT solver executable");
  app.add_option("--timeout-ms", o.timeout_ms, "per-query solver timeout")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", o.max_iter, "refinement iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed for randomized identity testing")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", o.threads, "judgments checked in parallel")->check(CLI::PositiveNumber);
  app.add_option("--report-out", o.report_out, "write the JSON report (or DOT) here");
  app.add_flag("--mock", o.mock, "use canned LLM responses from the problem file");

  std::string input;
  std::vector<std::string> inputs;
  std::optional<std::string> context_out;
  auto* verify = app.add_subcommand("verify", "check every step of a context file");
  verify->add_option("context", input, "context file")->required();
  auto* formalize_cmd = app.add_subcommand("formalize", "formalize a solution with an LLM, then check it");
  formalize_cmd->add_option("problem", input, "problem JSON with problem and solution text")->required();
  formalize_cmd->add_option("--context-out", context_out, "write the context here");
  auto* refine_cmd = app.add_subcommand("refine", "generate, check and regenerate until valid");
  refine_cmd->add_option("problem", input, "problem JSON")->required();
  auto* select = app.add_subcommand("select", "pick the shortest fully valid candidate");
  select->add_option("candidates", inputs, "context files")->required();
  auto* bench = app.add_subcommand("bench", "score the checker on a labeled corpus");
  bench->add_option("corpus", input, "directory of .ctx fixtures with .label.json sidecars")->required();
  auto* graph = app.add_subcommand("graph", "print the solution graph as DOT");
  graph->add_option("context", input, "context file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (verify->parsed()) return cmd_verify(input, o);
    if (formalize_cmd->parsed()) return cmd_formalize(input, context_out, o);
    if (refine_cmd->parsed()) return cmd_refine(input, o);
    if (select->parsed()) return cmd_select(inputs, o);
    if (bench->parsed()) return cmd_bench(input, o);
    if (graph->parsed()) return cmd_graph(input, o);
  } catch (const MissingFile& e) {
    std::cerr << "mathcheck: " << e.what() << "\n";
    return kMissingFile;
  } catch (const BadConfig& e) {
    std::cerr << "mathcheck: " << e.what() << "\n";
    return kBadConfig;
  } catch (const TransportError& e) {
    std::cerr << "mathcheck: " << e.what() << "\n";
    return kTransport;
  } catch (const std::exception& e) {
    std::cerr << "mathcheck: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
