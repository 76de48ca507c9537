#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "revision_eq/plan.hpp"
#include "revision_eq/stage_game.hpp"

namespace revision_eq {

using Rng = std::mt19937_64;

/// Episode stream r of a batch: mt19937_64 seeded from (master_seed, r).
Rng derive_rng(std::uint64_t master_seed, std::uint64_t stream);

/// Uniform draw in the open interval (0, 1) from the top 53 bits.
double uniform_open01(Rng& rng);

enum class StrategyKind { kLimitedRetaliation, kGrimTrigger, kConstant };
enum class ErrorModel { kUniformRandom, kDefect };

const char* to_string(StrategyKind kind);
const char* to_string(ErrorModel model);
StrategyKind parse_strategy_kind(const std::string& text);
ErrorModel parse_error_model(const std::string& text);

/// Template an agent is built from at the start of every episode.
struct AgentSpec {
  StrategyKind kind = StrategyKind::kLimitedRetaliation;
  PiecewisePlan plan;
  /// Retaliation coefficient; grim trigger retaliates until the deadline.
  double k = 0.5;
};

/// Per-episode mutable state of one agent.
struct AgentState {
  StrategyKind kind = StrategyKind::kLimitedRetaliation;
  const PiecewisePlan* plan = nullptr;
  double k = 0.0;
  double current_action = 0.0;
  /// Clock time -t + kt at which the running retaliation window closes.
  std::optional<double> retaliation_until;
};

struct SimConfig {
  double lambda = 1.0;
  double T = 1.0;
  double error_rate = 0.0;
  ErrorModel error_model = ErrorModel::kUniformRandom;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::array<AgentSpec, 2> agents;
  bool record_traces = false;
  bool keep_episode_records = false;
  /// 0 = REVISION_EQ_THREADS or hardware concurrency.
  unsigned workers = 0;

  void validate() const;
};

/// What happened at one revision opportunity.
struct OpportunityRecord {
  double time = 0.0;  // clock time -t
  std::array<double, 2> prescribed{};
  std::array<double, 2> realized{};
  std::array<bool, 2> erred{};
  /// Agent was inside its retaliation window when choosing.
  std::array<bool, 2> retaliating{};
  /// Agent observed a deviation from its plan and opened a window.
  std::array<bool, 2> triggered{};
  /// Agent saw a deviation while already retaliating and ignored it.
  std::array<bool, 2> ignored_deviation{};
  /// Window end after this opportunity (NaN when none is running).
  std::array<double, 2> retaliation_until{};
};

struct EpisodeTrace {
  std::array<double, 2> initial_actions{};
  std::vector<OpportunityRecord> opportunities;
};

struct EpisodeOutcome {
  std::array<double, 2> payoffs{};
  std::array<double, 2> final_actions{};
  std::size_t opportunities = 0;
  std::size_t retaliations_triggered = 0;
  std::optional<EpisodeTrace> trace;
};

struct EpisodeRecord {
  std::array<double, 2> payoffs{};
  std::array<double, 2> final_actions{};
  std::size_t opportunities = 0;
  std::size_t retaliations_triggered = 0;
};

struct SimResult {
  std::array<double, 2> mean_payoff{};
  std::array<double, 2> std_error{};
  /// Statistics of the per-episode average of the two payoffs.
  double mean_welfare = 0.0;
  double welfare_std_error = 0.0;
  std::size_t n = 0;
  /// False when n == 1 (standard errors are reported as 0).
  bool std_error_defined = false;
  std::vector<EpisodeRecord> episodes;
  std::vector<EpisodeTrace> traces;
};

/// Poisson revision opportunities on (-T, 0] by exponential inter-arrivals,
/// strictly increasing clock times.
std::vector<double> sample_revision_times(double lambda, double T, Rng& rng);

/// One revision game. Both standing actions start at x(T); at every
/// opportunity each agent plays its prescription (plan action, or a^N inside
/// its retaliation window), replaced by an error action with probability
/// error_rate. An agent outside its window that sees either realized action
/// differ from its plan opens the window (-t, -t + kt] (grim trigger: to the
/// deadline); deviations inside a running window are ignored. Payoffs are the
/// stage payoffs of the standing actions at the deadline.
EpisodeOutcome run_episode(const StageGame& game, const SimConfig& config, Rng& rng);

/// `replications` episodes, episode r on derive_rng(master_seed, r);
/// reductions run in ascending r, so results do not depend on the worker count.
SimResult run_batch(const StageGame& game, const SimConfig& config);

}  // namespace revision_eq
