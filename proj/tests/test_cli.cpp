#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "cli/cli.hpp"
#include "cli/manifest.hpp"
#include "json.hpp"
#include "revision_eq/equilibrium_check.hpp"
#include "revision_eq/errors.hpp"
#include "revision_eq/io.hpp"

namespace revision_eq::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "revision_eq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("revision_eq_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST(ParseRealList, RangesAndLists) {
  EXPECT_EQ(parse_real_list("1:5:1"), (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_real_list("1:50:1").size(), 50u);
  EXPECT_EQ(parse_real_list("0.5:1:0.25"), (std::vector<double>{0.5, 0.75, 1.0}));
  EXPECT_EQ(parse_real_list("0.33,0.6,0.85"), (std::vector<double>{0.33, 0.6, 0.85}));
  EXPECT_EQ(parse_real_list("7"), (std::vector<double>{7}));
  EXPECT_THROW(parse_real_list(""), InputError);
  EXPECT_THROW(parse_real_list("5:1:1"), InputError);
  EXPECT_THROW(parse_real_list("1:5:0"), InputError);
  EXPECT_THROW(parse_real_list("1:5"), InputError);
  EXPECT_THROW(parse_real_list("a,b"), InputError);
  EXPECT_THROW(parse_real_list("1,,2"), InputError);
}

TEST(ResolveGame, BuiltinsAndErrors) {
  EXPECT_EQ(resolve_game("pd").optimal_action(), 1.0);
  EXPECT_EQ(resolve_game("cournot").nash_action(), 5.0 / 3.0);
  EXPECT_THROW(resolve_game("nope"), InputError);
}

TEST(CmdValidate, ConstantPayoffGameFails) {
  auto flat = StageGame::custom("flat", 0.0, 1.0, 0.0, 1.0, [](double, double) { return 2.0; });
  std::ostringstream out;
  EXPECT_EQ(cmd_validate(flat, 101, out), kExitAnalyticFailure);
  EXPECT_EQ(cmd_validate(make_continuous_pd(), 101, out), kExitOk);
}

TEST_F(CliTest, ValidateExitCodes) {
  write_text_file(path("pd.json"), R"({"game": "pd"})");
  EXPECT_EQ(invoke({"validate", "--game", path("pd.json")}).code, 0);
  EXPECT_EQ(invoke({"validate", "--game", "cournot"}).code, 0);
  write_text_file(path("bad.json"), "{\"game\": ");
  EXPECT_EQ(invoke({"validate", "--game", path("bad.json")}).code, 2);
  write_text_file(path("odd.json"), R"({"game": "cournot", "p0": 1, "c": 4, "b": 1})");
  EXPECT_EQ(invoke({"validate", "--game", path("odd.json")}).code, 2);
  EXPECT_EQ(invoke({"validate", "--game", path("missing.json")}).code, 2);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"synthesize", "--lambda", "abc"}).code, 2);
  EXPECT_EQ(invoke({"sweep", "--T", "5:1:1"}).code, 2);
  EXPECT_EQ(invoke({"sweep"}).code, 2);
  EXPECT_EQ(invoke({"simulate", "--strategy", "TFT"}).code, 2);
  EXPECT_EQ(invoke({"synthesize", "--k", "1.5"}).code, 2);
  EXPECT_EQ(invoke({"synthesize", "--tail", "spline"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, SynthesizeWritesPlanAndManifest) {
  auto r = invoke({"synthesize", "--game", "pd", "--lambda", "1", "--T", "50", "--k", "0.33",
                   "--out", path("plan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("slots: 22"), std::string::npos);
  EXPECT_NE(r.out.find("verdict: pass"), std::string::npos);
  EXPECT_NE(r.out.find("expected_payoff: "), std::string::npos);
  EXPECT_NE(r.out.find("min_margin: "), std::string::npos);
  auto plan = parse_mpc_plan(read_text_file(path("plan.json")));
  EXPECT_EQ(plan.slot_count(), 22u);

  auto manifest = nlohmann::json::parse(read_text_file(path("plan.json") + ".manifest.json"));
  EXPECT_EQ(manifest["parameters"]["k"], "0.33000000000000002");
  EXPECT_EQ(manifest["tool_version"], tool_version());
  EXPECT_TRUE(manifest.contains("timestamp"));
  EXPECT_NE(manifest["command"].get<std::string>().find("synthesize"), std::string::npos);

  auto v = invoke({"verify", "--game", "pd", "--plan", path("plan.json"), "--lambda", "1"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(nlohmann::json::parse(v.out)["verdict"], "pass_with_epsilon");
}

TEST_F(CliTest, SynthesizeEdgeCases) {
  auto gt = invoke({"synthesize", "--k", "0.999999", "--out", path("gt.json")});
  EXPECT_EQ(gt.code, 0) << gt.err;
  auto tiny = invoke({"synthesize", "--T", "0.0001", "--out", path("tiny.json")});
  EXPECT_EQ(tiny.code, 0);
  EXPECT_NE(tiny.err.find("warning:"), std::string::npos);
  auto to_stdout = invoke({"synthesize", "--T", "5"});
  EXPECT_EQ(to_stdout.code, 0);
  EXPECT_NO_THROW(parse_mpc_plan(to_stdout.out));
}

TEST_F(CliTest, VerifyFailsOnBadPlan) {
  PiecewisePlan p;
  p.horizon = 50;
  p.breakpoints = {0.0};
  p.actions = {1.0};
  write_text_file(path("greedy.json"), plan_to_json(p));
  auto r = invoke({"verify", "--plan", path("greedy.json"), "--k", "0.05"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.out)["verdict"], "fail");
  EXPECT_EQ(invoke({"verify", "--plan", path("greedy.json")}).code, 2);  // needs --k
  auto with_grid = invoke({"verify", "--plan", path("greedy.json"), "--k", "0.05", "--with-grid"});
  EXPECT_TRUE(nlohmann::json::parse(with_grid.out).contains("margins"));
}

TEST_F(CliTest, PayoffOfConstantPlan) {
  PiecewisePlan p;
  p.horizon = 10;
  p.breakpoints = {0.0};
  p.actions = {1.0};
  write_text_file(path("one.json"), plan_to_json(p));
  auto r = invoke({"payoff", "--plan", path("one.json"), "--lambda", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["expected_payoff"], 1.0);
}

TEST_F(CliTest, SimulateTraceAndManifest) {
  auto r = invoke({"simulate", "--T", "10", "--replications", "20", "--error-rate", "0.1",
                   "--seed", "4", "--trace", path("trace.jsonl"), "--out", path("sim.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto sim = nlohmann::json::parse(read_text_file(path("sim.json")));
  EXPECT_EQ(sim["n"], 20);
  EXPECT_TRUE(fs::exists(path("sim.json.manifest.json")));
  EXPECT_TRUE(fs::exists(path("trace.jsonl.manifest.json")));
  std::istringstream lines(read_text_file(path("trace.jsonl")));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("retaliation_until"));
    ++count;
  }
  EXPECT_GT(count, 20);
}

TEST_F(CliTest, SweepCsvManifestDigestsGameFile) {
  write_text_file(path("game.json"), R"({"game": "pd"})");
  auto r = invoke({"sweep", "--game", path("game.json"), "--T", "1:3:1", "--k", "0.33,0.6",
                   "--errors", "0.1", "--replications", "10", "--out", path("sweep.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto csv = read_text_file(path("sweep.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSweepCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2 * 1 * 2);
  auto manifest = nlohmann::json::parse(read_text_file(path("sweep.csv") + ".manifest.json"));
  EXPECT_EQ(manifest["input_digests"][path("game.json")],
            sha256_hex(read_text_file(path("game.json"))));
  EXPECT_EQ(manifest["seed"], 0);
}

TEST_F(CliTest, SweepIsByteIdenticalAcrossThreads) {
  std::vector<std::string> base = {"sweep", "--T", "5,20", "--errors", "0,0.3", "--replications", "300",
                                   "--seed", "12"};
  auto a = base, b = base;
  a.insert(a.end(), {"--threads", "1"});
  b.insert(b.end(), {"--threads", "8"});
  EXPECT_EQ(invoke(a).out, invoke(b).out);
}

TEST_F(CliTest, CompareOutput) {
  auto r = invoke({"compare", "--T", "5", "--errors", "0.3", "--replications", "100"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kCompareCsvHeader);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, OutputsEqualLibraryCalls) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    bool pd = trial % 2 == 0;
    StageGame game = pd ? make_continuous_pd() : make_cournot(10, 5, 1);
    double lambda = 0.5 + 1.5 * u(rng);
    double T = 1 + 39 * u(rng);
    double k = 0.2 + 0.7 * u(rng);
    double error = 0.3 * u(rng);
    auto seed = static_cast<std::uint64_t>(rng() % 1000);
    std::string g = pd ? "pd" : "cournot";
    auto num = [](double v) { return format_real(v); };
    std::string plan_path = path("plan" + std::to_string(trial) + ".json");

    auto syn = invoke({"synthesize", "--game", g, "--lambda", num(lambda), "--T", num(T), "--k", num(k),
                       "--out", plan_path});
    ASSERT_EQ(syn.code, 0) << syn.err;
    auto lib_plan = synthesize_plan(game, lambda, T, k).plan;
    EXPECT_EQ(read_text_file(plan_path), plan_to_json(lib_plan));

    auto ver = invoke({"verify", "--game", g, "--plan", plan_path, "--lambda", num(lambda)});
    EXPECT_EQ(ver.out, to_json(verify_spe(game, lib_plan.to_piecewise(), k, lambda, 1000, 1e-6), false));

    auto pay = invoke({"payoff", "--game", g, "--plan", plan_path, "--lambda", num(lambda)});
    EXPECT_EQ(nlohmann::json::parse(pay.out)["expected_payoff"].get<double>(),
              expected_payoff(game, lib_plan, lambda, T));

    auto sim = invoke({"simulate", "--game", g, "--plan", plan_path, "--lambda", num(lambda),
                       "--error-rate", num(error), "--replications", "200", "--seed",
                       std::to_string(seed), "--strategy", "LR", "--opponent", "GT"});
    ASSERT_EQ(sim.code, 0) << sim.err;
    SimConfig config;
    config.lambda = lambda;
    config.T = T;
    config.error_rate = error;
    config.replications = 200;
    config.master_seed = seed;
    config.agents[0] = AgentSpec{StrategyKind::kLimitedRetaliation, lib_plan.to_piecewise(), k};
    config.agents[1] = AgentSpec{StrategyKind::kGrimTrigger, lib_plan.to_piecewise(), k};
    auto lib_sim = run_batch(game, config);
    auto j = nlohmann::json::parse(sim.out);
    EXPECT_EQ(j["mean_payoff"][0].get<double>(), lib_sim.mean_payoff[0]);
    EXPECT_EQ(j["mean_payoff"][1].get<double>(), lib_sim.mean_payoff[1]);
    EXPECT_EQ(j["welfare_std_error"].get<double>(), lib_sim.welfare_std_error);

    auto swp = invoke({"sweep", "--game", g, "--T", num(T), "--k", num(k), "--errors", num(error),
                       "--lambda", num(lambda), "--replications", "100", "--seed", std::to_string(seed)});
    SweepConfig sc;
    sc.T_values = {T};
    sc.k_values = {k};
    sc.error_rates = {error};
    sc.lambda = lambda;
    sc.replications = 100;
    sc.master_seed = seed;
    EXPECT_EQ(swp.out, sweep_csv(sweep(game, sc)));
  }
}

#ifdef REVISION_EQ_CLI_PATH
int system_exit(const std::string& args) {
  int status = std::system((std::string(REVISION_EQ_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  write_text_file(path("pd.json"), R"({"game": "pd"})");
  write_text_file(path("bad.json"), "{");
  EXPECT_EQ(system_exit("validate --game " + path("pd.json")), 0);
  EXPECT_EQ(system_exit("validate --game " + path("bad.json")), 2);
  EXPECT_EQ(system_exit("synthesize --T 50 --k 0.33 --out " + path("p.json")), 0);
  EXPECT_EQ(system_exit("sweep --T 3:1:1"), 2);
  EXPECT_EQ(system_exit("--version"), 0);
}
#endif

}  // namespace
}  // namespace revision_eq::cli
