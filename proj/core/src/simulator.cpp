#include "revision_eq/simulator.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "revision_eq/errors.hpp"
#include "revision_eq/parallel.hpp"

namespace revision_eq {

namespace {

constexpr std::size_t kEpisodesPerTask = 256;

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments ordered_moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    double var = ss / static_cast<double>(xs.size() - 1);
    m.std_error = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return m;
}

}  // namespace

Rng derive_rng(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kLimitedRetaliation:
      return "LR";
    case StrategyKind::kGrimTrigger:
      return "GT";
    case StrategyKind::kConstant:
      return "constant";
  }
  return "?";
}

const char* to_string(ErrorModel model) {
  return model == ErrorModel::kUniformRandom ? "uniform_random" : "defect";
}

StrategyKind parse_strategy_kind(const std::string& text) {
  if (text == "LR" || text == "lr") return StrategyKind::kLimitedRetaliation;
  if (text == "GT" || text == "gt") return StrategyKind::kGrimTrigger;
  if (text == "constant") return StrategyKind::kConstant;
  throw InputError(fmt::format("unknown strategy '{}' (expected LR, GT or constant)", text));
}

ErrorModel parse_error_model(const std::string& text) {
  if (text == "uniform_random") return ErrorModel::kUniformRandom;
  if (text == "defect") return ErrorModel::kDefect;
  throw InputError(fmt::format("unknown error model '{}' (expected uniform_random or defect)", text));
}

void SimConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be > 0");
  if (!(error_rate >= 0.0 && error_rate < 1.0)) throw DomainError("error_rate must lie in [0,1)");
  if (replications < 1) throw DomainError("replications must be >= 1");
  for (const auto& agent : agents) {
    agent.plan.validate();
    if (agent.plan.empty()) throw DomainError("agent plan is empty");
    if (agent.plan.horizon < T) {
      throw DomainError(fmt::format("agent plan covers {} < T = {}", agent.plan.horizon, T));
    }
    if (agent.kind == StrategyKind::kLimitedRetaliation && !(agent.k > 0.0 && agent.k < 1.0)) {
      throw DomainError("LR agent needs k in (0,1)");
    }
  }
}

std::vector<double> sample_revision_times(double lambda, double T, Rng& rng) {
  if (!(lambda > 0.0) || !(T > 0.0)) throw DomainError("lambda and T must be > 0");
  std::vector<double> times;
  double clock = -T;
  for (;;) {
    double next = clock - std::log1p(-uniform_open01(rng)) / lambda;
    if (next > 0.0) break;
    if (next > clock) times.push_back(next);
    clock = next;
  }
  return times;
}

EpisodeOutcome run_episode(const StageGame& game, const SimConfig& config, Rng& rng) {
  const double a_nash = game.nash_action();
  const double lo = game.action_lo();
  const double hi = game.action_hi();

  std::array<AgentState, 2> agents;
  for (std::size_t p = 0; p < 2; ++p) {
    const AgentSpec& spec = config.agents[p];
    agents[p].kind = spec.kind;
    agents[p].plan = &spec.plan;
    agents[p].k = spec.k;
    agents[p].current_action = spec.plan.action_at(config.T);
  }

  EpisodeOutcome out;
  if (config.record_traces) {
    out.trace.emplace();
    out.trace->initial_actions = {agents[0].current_action, agents[1].current_action};
  }

  const auto times = sample_revision_times(config.lambda, config.T, rng);
  out.opportunities = times.size();
  for (double clock : times) {
    const double t = -clock;
    OpportunityRecord rec;
    rec.time = clock;
    std::array<double, 2> planned{};
    for (std::size_t p = 0; p < 2; ++p) {
      AgentState& a = agents[p];
      if (a.retaliation_until && clock > *a.retaliation_until) a.retaliation_until.reset();
      planned[p] = a.plan->action_at(t);
      rec.retaliating[p] = a.retaliation_until.has_value();
      rec.prescribed[p] = rec.retaliating[p] ? a_nash : planned[p];
    }
    // Two draws per player per opportunity keep streams aligned across strategies.
    for (std::size_t p = 0; p < 2; ++p) {
      double coin = uniform_open01(rng);
      double pick = uniform_open01(rng);
      rec.erred[p] = coin < config.error_rate;
      if (!rec.erred[p]) {
        rec.realized[p] = rec.prescribed[p];
      } else if (config.error_model == ErrorModel::kUniformRandom) {
        rec.realized[p] = lo + (hi - lo) * pick;
      } else {
        rec.realized[p] = a_nash;
      }
    }
    for (std::size_t p = 0; p < 2; ++p) {
      AgentState& a = agents[p];
      a.current_action = rec.realized[p];
      if (a.kind == StrategyKind::kConstant) continue;
      bool deviated = rec.realized[0] != planned[p] || rec.realized[1] != planned[p];
      if (!deviated) continue;
      if (a.retaliation_until) {
        rec.ignored_deviation[p] = true;
      } else {
        rec.triggered[p] = true;
        ++out.retaliations_triggered;
        a.retaliation_until = a.kind == StrategyKind::kGrimTrigger ? 0.0 : -(1.0 - a.k) * t;
      }
    }
    for (std::size_t p = 0; p < 2; ++p) {
      rec.retaliation_until[p] = agents[p].retaliation_until.value_or(
          std::numeric_limits<double>::quiet_NaN());
    }
    if (out.trace) out.trace->opportunities.push_back(rec);
  }

  out.final_actions = {agents[0].current_action, agents[1].current_action};
  out.payoffs = {game.payoff(out.final_actions[0], out.final_actions[1]),
                 game.payoff(out.final_actions[1], out.final_actions[0])};
  return out;
}

SimResult run_batch(const StageGame& game, const SimConfig& config) {
  config.validate();
  const std::size_t n = config.replications;
  std::vector<EpisodeOutcome> outcomes(n);
  const std::size_t tasks = (n + kEpisodesPerTask - 1) / kEpisodesPerTask;
  parallel_for(tasks, resolve_worker_count(config.workers), [&](std::size_t task) {
    const std::size_t begin = task * kEpisodesPerTask;
    const std::size_t end = std::min(n, begin + kEpisodesPerTask);
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng = derive_rng(config.master_seed, r);
      outcomes[r] = run_episode(game, config, rng);
    }
  });

  SimResult result;
  result.n = n;
  result.std_error_defined = n > 1;
  std::vector<double> column(n);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t r = 0; r < n; ++r) column[r] = outcomes[r].payoffs[p];
    Moments m = ordered_moments(column);
    result.mean_payoff[p] = m.mean;
    result.std_error[p] = m.std_error;
  }
  for (std::size_t r = 0; r < n; ++r) {
    column[r] = 0.5 * (outcomes[r].payoffs[0] + outcomes[r].payoffs[1]);
  }
  Moments w = ordered_moments(column);
  result.mean_welfare = w.mean;
  result.welfare_std_error = w.std_error;

  if (config.keep_episode_records) {
    result.episodes.reserve(n);
    for (const auto& o : outcomes) {
      result.episodes.push_back({o.payoffs, o.final_actions, o.opportunities,
                                 o.retaliations_triggered});
    }
  }
  if (config.record_traces) {
    result.traces.reserve(n);
    for (auto& o : outcomes) result.traces.push_back(std::move(*o.trace));
  }
  return result;
}

}  // namespace revision_eq
