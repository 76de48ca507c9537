#include "revision_eq/sweep.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include <fmt/format.h>

#include "revision_eq/errors.hpp"

namespace revision_eq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else if (ch == '\n' || ch == '\r') out += ' ';
    else out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::vector<SweepStrategy> default_sweep_strategies() {
  return {{"LR", StrategyKind::kLimitedRetaliation, GtPlanSource::kSharedMpc},
          {"GT", StrategyKind::kGrimTrigger, GtPlanSource::kSharedMpc}};
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t t_index, std::size_t k_index,
                        std::size_t error_index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(t_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(k_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(error_index));
  return h;
}

std::vector<SweepRow> sweep(const StageGame& game, const SweepConfig& config) {
  if (config.T_values.empty()) throw InputError("sweep needs at least one T value");
  if (config.k_values.empty()) throw InputError("sweep needs at least one k value");
  if (config.error_rates.empty()) throw InputError("sweep needs at least one error rate");
  if (config.strategies.empty()) throw InputError("sweep needs at least one strategy");

  std::vector<SweepRow> rows;
  for (std::size_t ti = 0; ti < config.T_values.size(); ++ti) {
    const double T = config.T_values[ti];
    std::optional<PiecewisePlan> ode_plan;
    std::string ode_error;
    for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
      const double k = config.k_values[ki];
      std::optional<PiecewisePlan> mpc_plan;
      std::string mpc_error;
      try {
        mpc_plan = synthesize_plan(game, config.lambda, T, k, config.synthesis).plan.to_piecewise();
      } catch (const std::exception& e) {
        mpc_error = fmt::format("synthesis failed: {}", e.what());
      }

      for (std::size_t ei = 0; ei < config.error_rates.size(); ++ei) {
        const double rate = config.error_rates[ei];
        const std::uint64_t seed = cell_seed(config.master_seed, ti, ki, ei);
        for (const auto& strategy : config.strategies) {
          SweepRow row;
          row.T = T;
          row.strategy = strategy.label;
          row.k = k;
          row.error_rate = rate;
          row.error_model = config.error_model;
          row.seed = seed;
          try {
            const PiecewisePlan* plan = nullptr;
            if (strategy.kind == StrategyKind::kGrimTrigger &&
                strategy.gt_plan == GtPlanSource::kOde) {
              if (!ode_plan && ode_error.empty()) {
                OdeTail tail = gt_ode_tail(game, config.lambda, T, config.ode_steps);
                if (tail.truncated) {
                  ode_error = "grim-trigger ODE plan truncated at a singular slope";
                } else {
                  ode_plan = std::move(tail.plan);
                }
              }
              if (!ode_plan) throw InfeasibleError(ode_error);
              plan = &*ode_plan;
            } else {
              if (!mpc_plan) throw InfeasibleError(mpc_error);
              plan = &*mpc_plan;
            }

            SimConfig sim;
            sim.lambda = config.lambda;
            sim.T = T;
            sim.error_rate = rate;
            sim.error_model = config.error_model;
            sim.replications = config.replications;
            sim.master_seed = seed;
            sim.workers = config.workers;
            sim.agents[0] = AgentSpec{strategy.kind, *plan, k};
            sim.agents[1] = sim.agents[0];
            SimResult res = run_batch(game, sim);
            row.mean = res.mean_welfare;
            row.std_error = res.welfare_std_error;
            row.n = res.n;
          } catch (const std::exception& e) {
            row.error = e.what();
            row.mean = std::nan("");
            row.std_error = std::nan("");
            row.n = 0;
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    const bool failed = !r.error.empty();
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_real(r.T), csv_field(r.strategy),
                       format_real(r.k), format_real(r.error_rate), to_string(r.error_model),
                       failed ? "" : format_real(r.mean), failed ? "" : format_real(r.std_error),
                       r.n, r.seed, csv_field(r.error));
  }
  return out;
}

std::vector<CompareRow> compare_strategies(const std::vector<SweepRow>& rows,
                                           const std::string& first, const std::string& second) {
  using Key = std::tuple<double, double, double>;
  std::map<Key, const SweepRow*> seconds;
  for (const auto& r : rows) {
    if (r.strategy == second) seconds[{r.T, r.k, r.error_rate}] = &r;
  }
  std::vector<CompareRow> out;
  for (const auto& r : rows) {
    if (r.strategy != first) continue;
    auto it = seconds.find({r.T, r.k, r.error_rate});
    if (it == seconds.end()) continue;
    const SweepRow& s = *it->second;
    CompareRow c;
    c.T = r.T;
    c.k = r.k;
    c.error_rate = r.error_rate;
    c.first = first;
    c.second = second;
    if (!r.error.empty() || !s.error.empty()) {
      c.error = !r.error.empty() ? r.error : s.error;
    } else {
      c.first_mean = r.mean;
      c.second_mean = s.mean;
      c.difference = r.mean - s.mean;
      c.combined_std_error = std::sqrt(r.std_error * r.std_error + s.std_error * s.std_error);
      c.z = c.combined_std_error > 0.0 ? c.difference / c.combined_std_error : 0.0;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = kCompareCsvHeader;
  out += '\n';
  for (const auto& c : rows) {
    const bool failed = !c.error.empty();
    auto real = [&](double v) { return failed ? std::string() : format_real(v); };
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", format_real(c.T), format_real(c.k),
                       format_real(c.error_rate), csv_field(c.first), csv_field(c.second),
                       real(c.first_mean), real(c.second_mean), real(c.difference),
                       real(c.combined_std_error), real(c.z), csv_field(c.error));
  }
  return out;
}

}  // namespace revision_eq
