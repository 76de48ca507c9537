#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "revision_eq/plan_synthesis.hpp"
#include "revision_eq/simulator.hpp"
#include "revision_eq/stage_game.hpp"
#include "revision_eq/sweep.hpp"

namespace revision_eq::cli {

enum ExitCode : int { kExitOk = 0, kExitAnalyticFailure = 1, kExitUsage = 2 };

/// Resolves --game: "pd", "cournot" (p0=10, c=5, b=1) or a game spec file.
StageGame resolve_game(const std::string& arg);

/// Parses "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_real_list(const std::string& text);

int cmd_validate(const StageGame& game, int grid_size, std::ostream& out);

struct SynthesizeArgs {
  double lambda = 1.0;
  double T = 50.0;
  double k = 0.33;
  double epsilon = 1e-6;
  TailPolicy tail_policy = TailPolicy::kEpsilonRelax;
  int grid_points = 1000;
  /// Empty = plan JSON on stdout.
  std::string out_path;
};
int cmd_synthesize(const StageGame& game, const SynthesizeArgs& args, std::ostream& out,
                   std::ostream& err);

struct VerifyArgs {
  std::string plan_path;
  double lambda = 1.0;
  /// Required for piecewise plan files; MPC files carry their own k.
  double k = 0.0;
  int grid_points = 1000;
  double epsilon = 1e-6;
  bool with_grid = false;
};
int cmd_verify(const StageGame& game, const VerifyArgs& args, std::ostream& out);

struct PayoffArgs {
  std::string plan_path;
  double lambda = 1.0;
  /// Negative = the plan's horizon.
  double horizon = -1.0;
};
int cmd_payoff(const StageGame& game, const PayoffArgs& args, std::ostream& out);

struct SimulateArgs {
  double lambda = 1.0;
  double T = 50.0;
  double k = 0.33;
  double epsilon = 1e-6;
  /// Empty = synthesize an MPC plan for (lambda, T, k).
  std::string plan_path;
  StrategyKind strategy = StrategyKind::kLimitedRetaliation;
  StrategyKind opponent = StrategyKind::kLimitedRetaliation;
  double error_rate = 0.0;
  ErrorModel error_model = ErrorModel::kUniformRandom;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string trace_path;
  std::string out_path;
};
int cmd_simulate(const StageGame& game, const SimulateArgs& args, std::ostream& out);

struct SweepArgs {
  std::vector<double> T_values;
  std::vector<double> k_values;
  std::vector<double> error_rates;
  ErrorModel error_model = ErrorModel::kUniformRandom;
  GtPlanSource gt_plan = GtPlanSource::kSharedMpc;
  double lambda = 1.0;
  double epsilon = 1e-6;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_path;
};
SweepConfig make_sweep_config(const SweepArgs& args);
int cmd_sweep(const StageGame& game, const SweepArgs& args, std::ostream& out);
int cmd_compare(const StageGame& game, const SweepArgs& args, std::ostream& out);

/// Full command line: parses argv, runs the subcommand, maps errors to exit
/// codes (2 usage/input, 1 analytic failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace revision_eq::cli
