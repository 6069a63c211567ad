#include "mathcheck/subprocess.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace mathcheck;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = MATHCHECK_FIXTURES;

ProcessResult run(std::vector<std::string> args) {
  args.insert(args.begin(), MATHCHECK_CLI);
  args.push_back("--solver-path");
  args.push_back(MATHCHECK_SOLVER);
  return run_process(args, "", 120000);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp(const std::string& name) {
  auto dir = fs::temp_directory_path() / "mathcheck_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, VerifyExitStatuses) {
  EXPECT_EQ(run({"verify", kFixtures + "/corpus/c01_arith_chain.ctx"}).exit_code, 0);
  const auto report = temp("e01.json");
  auto r = run({"verify", kFixtures + "/corpus/e01_arith_slip.ctx", "--report-out", report.string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("status: HasInvalid at step 2"), std::string::npos);
  auto j = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(j["schema"], "mathcheck.report/1");
  EXPECT_EQ(j["first_invalid"], 2);
  EXPECT_EQ(run({"verify", kFixtures + "/hard/fermat3.ctx", "--timeout-ms", "1000"}).exit_code, 2);
  EXPECT_EQ(run({"verify", kFixtures + "/does-not-exist.ctx"}).exit_code, 3);
  EXPECT_GT(run({"verify", kFixtures + "/select/cand3.ctx"}).exit_code, 2);
  EXPECT_GT(run({"frobnicate"}).exit_code, 2);
}

TEST(Cli, Graph) {
  auto r = run({"graph", kFixtures + "/graph/square_sum.ctx"});
  ASSERT_EQ(r.exit_code, 0);
  std::regex node(R"re(n\d+ \[label="\d+:\w+"\];)re");
  EXPECT_EQ(std::distance(std::sregex_iterator(r.out.begin(), r.out.end(), node), std::sregex_iterator()), 3);
  const auto empty = temp("empty.ctx");
  std::ofstream(empty) << "# nothing here\n";
  r = run({"graph", empty.string()});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.find("->"), std::string::npos);
  EXPECT_NE(r.out.find("digraph{"), std::string::npos);
}

TEST(Cli, Select) {
  std::vector<std::string> args{"select"};
  for (int i = 0; i < 8; ++i) args.push_back(kFixtures + "/select/cand" + std::to_string(i) + ".ctx");
  auto r = run(args);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("selected: 4 "), std::string::npos);
  r = run({"select", kFixtures + "/select/cand0.ctx", kFixtures + "/select/cand6.ctx"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("selected: none"), std::string::npos);
  r = run({"select", kFixtures + "/select/cand4.ctx"});
  EXPECT_NE(r.out.find("selected: 0 "), std::string::npos);
}

TEST(Cli, RefineAndFormalizeWithMocks) {
  const auto out = temp("refine.json");
  auto r = run({"refine", kFixtures + "/refine/wrong-then-right.json", "--mock", "--max-iter", "3", "--report-out",
                out.string()});
  EXPECT_EQ(r.exit_code, 0);
  auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["iterations"], 2);
  EXPECT_EQ(j["feedback_messages"], 1);
  EXPECT_EQ(j["final_status"], "AllValid");
  EXPECT_EQ(run({"refine", kFixtures + "/refine/always-wrong.json", "--mock", "--max-iter", "3"}).exit_code, 1);

  r = run({"formalize", kFixtures + "/formalizer/fib-solution.json", "--mock"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("formalized in 1 attempt(s)"), std::string::npos);
}

TEST(Cli, ConfigAndEnvironment) {
  const auto ini = temp("cfg.ini");
  std::ofstream(ini) << "[smt]\npath = /nonexistent/solver\n";
  // Explicit --solver-path beats the config file.
  EXPECT_EQ(run({"verify", kFixtures + "/corpus/c03_inequality_chain.ctx", "--config", ini.string()}).exit_code, 0);
  std::ofstream(ini) << "[smt]\nnonsense = 1\n";
  EXPECT_EQ(run({"verify", kFixtures + "/corpus/c03_inequality_chain.ctx", "--config", ini.string()}).exit_code, 5);
}

TEST(Cli, BenchIsDeterministic) {
  const auto a = temp("bench_a.json"), b = temp("bench_b.json");
  auto r1 = run({"bench", kFixtures + "/corpus", "--mock", "--seed", "42", "--report-out", a.string()});
  auto r2 = run({"bench", kFixtures + "/corpus", "--mock", "--seed", "42", "--report-out", b.string()});
  ASSERT_EQ(r1.exit_code, 0) << r1.err;
  ASSERT_EQ(r2.exit_code, 0) << r2.err;
  EXPECT_EQ(slurp(a), slurp(b));
  auto j = nlohmann::json::parse(slurp(a));
  EXPECT_EQ(j["detection_rate"], 1.0);
  EXPECT_EQ(j["false_alarm_rate"], 0.0);
  const auto empty = fs::temp_directory_path() / "mathcheck_cli_test" / "empty_corpus";
  fs::create_directories(empty);
  EXPECT_GT(run({"bench", empty.string()}).exit_code, 2);
}
