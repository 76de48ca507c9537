#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revision_eq/plan_synthesis.hpp"
#include "revision_eq/simulator.hpp"
#include "revision_eq/stage_game.hpp"

namespace revision_eq {

/// Which plan a grim-trigger baseline follows.
enum class GtPlanSource {
  /// The LR strategy's MPC plan, retaliating to the deadline.
  kSharedMpc,
  /// The grim-trigger ODE trajectory over the whole horizon.
  kOde,
};

struct SweepStrategy {
  std::string label;
  StrategyKind kind = StrategyKind::kLimitedRetaliation;
  GtPlanSource gt_plan = GtPlanSource::kSharedMpc;
};

/// LR and GT on the shared MPC plan.
std::vector<SweepStrategy> default_sweep_strategies();

struct SweepConfig {
  std::vector<double> T_values;
  std::vector<double> k_values;
  std::vector<double> error_rates;
  ErrorModel error_model = ErrorModel::kUniformRandom;
  double lambda = 1.0;
  std::size_t replications = 1000;
  std::uint64_t master_seed = 0;
  SynthesisOptions synthesis;
  std::vector<SweepStrategy> strategies = default_sweep_strategies();
  int ode_steps = 1024;
  unsigned workers = 0;
};

struct SweepRow {
  double T = 0.0;
  std::string strategy;
  double k = 0.0;
  double error_rate = 0.0;
  ErrorModel error_model = ErrorModel::kUniformRandom;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// Empty unless the row failed (synthesis infeasible, bad plan, ...).
  std::string error;
};

/// Seed of sweep cell (T index, k index, error index); all strategies in a
/// cell share it.
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t t_index, std::size_t k_index,
                        std::size_t error_index);

/// Rows ordered by T, then k, then error rate, then strategy. Plans are
/// synthesized once per (T, k). A failing row records its message and the
/// sweep continues.
std::vector<SweepRow> sweep(const StageGame& game, const SweepConfig& config);

inline constexpr const char* kSweepCsvHeader =
    "T,strategy,k,error_rate,error_model,mean,std_error,n,seed,error";

/// Fixed column order; reals printed with 17 significant digits.
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct CompareRow {
  double T = 0.0;
  double k = 0.0;
  double error_rate = 0.0;
  std::string first;
  std::string second;
  double first_mean = 0.0;
  double second_mean = 0.0;
  double difference = 0.0;
  double combined_std_error = 0.0;
  /// difference / combined_std_error (0 when the error is 0).
  double z = 0.0;
  std::string error;
};

/// Pairs the rows of two strategies cell by cell.
std::vector<CompareRow> compare_strategies(const std::vector<SweepRow>& rows,
                                           const std::string& first, const std::string& second);

inline constexpr const char* kCompareCsvHeader =
    "T,k,error_rate,first,second,first_mean,second_mean,difference,combined_std_error,z,error";

std::string compare_csv(const std::vector<CompareRow>& rows);

/// "{:.17g}".
std::string format_real(double v);

}  // namespace revision_eq
