#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "revision_eq/errors.hpp"
#include "revision_eq/plan_synthesis.hpp"
#include "revision_eq/simulator.hpp"

namespace revision_eq {
namespace {

PiecewisePlan constant(double T, double a) {
  PiecewisePlan p;
  p.horizon = T;
  p.breakpoints = {0.0};
  p.actions = {a};
  return p;
}

SimConfig both(const PiecewisePlan& plan, double k, StrategyKind kind = StrategyKind::kLimitedRetaliation) {
  SimConfig c;
  c.lambda = 1.0;
  c.T = plan.horizon;
  c.agents[0] = AgentSpec{kind, plan, k};
  c.agents[1] = c.agents[0];
  return c;
}

TEST(Rng, UniformOpen01StaysInside) {
  Rng rng = derive_rng(1, 2);
  for (int i = 0; i < 100000; ++i) {
    double u = uniform_open01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, StreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 100; ++s) firsts.insert(derive_rng(0, s)());
  for (std::uint64_t m = 1; m < 100; ++m) firsts.insert(derive_rng(m, 0)());
  EXPECT_EQ(firsts.size(), 199u);
  EXPECT_EQ(derive_rng(5, 9)(), derive_rng(5, 9)());
}

TEST(Enums, RoundTrip) {
  for (auto k : {StrategyKind::kLimitedRetaliation, StrategyKind::kGrimTrigger, StrategyKind::kConstant}) {
    EXPECT_EQ(parse_strategy_kind(to_string(k)), k);
  }
  for (auto m : {ErrorModel::kUniformRandom, ErrorModel::kDefect}) EXPECT_EQ(parse_error_model(to_string(m)), m);
  EXPECT_THROW(parse_strategy_kind("TFT"), InputError);
  EXPECT_THROW(parse_error_model("gauss"), InputError);
}

TEST(SampleRevisionTimes, PoissonCountAndOrder) {
  Rng rng = derive_rng(42, 0);
  double total = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto times = sample_revision_times(1.0, 50.0, rng);
    for (std::size_t j = 0; j < times.size(); ++j) {
      ASSERT_GT(times[j], -50.0);
      ASSERT_LE(times[j], 0.0);
      if (j) ASSERT_GT(times[j], times[j - 1]);
    }
    total += static_cast<double>(times.size());
  }
  EXPECT_NEAR(total / draws, 50.0, 3 * std::sqrt(50.0 / draws));
}

TEST(SampleRevisionTimes, TinyHorizonIsUsuallyEmpty) {
  Rng rng = derive_rng(1, 1);
  int empty = 0;
  for (int i = 0; i < 1000; ++i) empty += sample_revision_times(1.0, 1e-6, rng).empty();
  EXPECT_GE(empty, 998);
  EXPECT_THROW(sample_revision_times(0.0, 1.0, rng), DomainError);
}

TEST(RunEpisode, FullCooperationWithoutErrors) {
  auto pd = make_continuous_pd();
  auto config = both(constant(10, 1.0), 0.5);
  Rng rng = derive_rng(0, 0);
  auto out = run_episode(pd, config, rng);
  EXPECT_EQ(out.payoffs[0], 1.0);
  EXPECT_EQ(out.payoffs[1], 1.0);
  EXPECT_EQ(out.retaliations_triggered, 0u);
}

TEST(RunEpisode, ErrorFreePayoffIsLastOpportunityAction) {
  auto pd = make_continuous_pd();
  auto plan = synthesize_plan(pd, 1.0, 10.0, 0.33).plan.to_piecewise();
  auto config = both(plan, 0.33);
  config.record_traces = true;
  for (std::uint64_t r = 0; r < 200; ++r) {
    Rng rng = derive_rng(3, r);
    auto out = run_episode(pd, config, rng);
    double last = out.trace->opportunities.empty() ? plan.action_at(10.0)
                                                   : plan.action_at(-out.trace->opportunities.back().time);
    EXPECT_EQ(out.final_actions[0], last);
    EXPECT_EQ(out.payoffs[0], pd.symmetric_payoff(last));
    EXPECT_EQ(out.retaliations_triggered, 0u);
  }
}

TEST(RunEpisode, NoOpportunitiesKeepInitialActions) {
  auto pd = make_continuous_pd();
  PiecewisePlan p;
  p.horizon = 1e-7;
  p.breakpoints = {-0.5e-7, 0.0};
  p.actions = {0.8, 0.1};
  auto config = both(p, 0.5);
  config.lambda = 1e-3;
  Rng rng = derive_rng(0, 0);
  auto out = run_episode(pd, config, rng);
  EXPECT_EQ(out.opportunities, 0u);
  EXPECT_EQ(out.payoffs[0], pd.symmetric_payoff(0.8));
}

TEST(RunEpisode, DefectErrorModelPlaysNash) {
  auto pd = make_continuous_pd();
  auto config = both(constant(20, 1.0), 0.5, StrategyKind::kConstant);
  config.error_rate = 0.5;
  config.error_model = ErrorModel::kDefect;
  config.record_traces = true;
  Rng rng = derive_rng(9, 0);
  auto out = run_episode(pd, config, rng);
  for (const auto& rec : out.trace->opportunities) {
    for (int p = 0; p < 2; ++p) EXPECT_EQ(rec.realized[p], rec.erred[p] ? 0.0 : 1.0);
  }
}

TEST(RunEpisode, ConstantStrategyNeverRetaliates) {
  auto pd = make_continuous_pd();
  auto config = both(constant(20, 1.0), 0.5, StrategyKind::kConstant);
  config.error_rate = 0.3;
  Rng rng = derive_rng(9, 1);
  EXPECT_EQ(run_episode(pd, config, rng).retaliations_triggered, 0u);
}

TEST(RunEpisode, RetaliationWindowsFollowTheRules) {
  auto pd = make_continuous_pd();
  auto plan = synthesize_plan(pd, 1.0, 20.0, 0.4).plan.to_piecewise();
  for (auto kind : {StrategyKind::kLimitedRetaliation, StrategyKind::kGrimTrigger}) {
    auto config = both(plan, 0.4, kind);
    config.error_rate = 0.1;
    config.record_traces = true;
    for (std::uint64_t r = 0; r < 100; ++r) {
      Rng rng = derive_rng(17, r);
      auto out = run_episode(pd, config, rng);
      for (int p = 0; p < 2; ++p) {
        double until = NAN;
        for (const auto& rec : out.trace->opportunities) {
          bool inside = !std::isnan(until) && rec.time <= until;
          ASSERT_EQ(rec.retaliating[p], inside);
          ASSERT_EQ(rec.prescribed[p], inside ? 0.0 : plan.action_at(-rec.time));
          if (rec.triggered[p]) {
            ASSERT_FALSE(inside);
            until = kind == StrategyKind::kGrimTrigger ? 0.0 : rec.time * (1 - 0.4);
            ASSERT_EQ(rec.retaliation_until[p], until);
          } else if (!inside) {
            until = NAN;
          }
          if (rec.ignored_deviation[p]) ASSERT_TRUE(inside);
        }
      }
    }
  }
}

TEST(SimConfig, ValidateRejectsBadConfigs) {
  auto pd = make_continuous_pd();
  auto good = both(constant(10, 1.0), 0.5);
  EXPECT_NO_THROW(good.validate());
  auto c = good;
  c.lambda = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = good;
  c.error_rate = 1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = good;
  c.replications = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = good;
  c.T = 11;
  EXPECT_THROW(c.validate(), DomainError);
  c = good;
  c.agents[1].k = 1.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(RunBatch, SingleEpisodeFlagsStdError) {
  auto pd = make_continuous_pd();
  auto config = both(constant(10, 0.5), 0.5);
  config.replications = 1;
  auto r = run_batch(pd, config);
  EXPECT_EQ(r.n, 1u);
  EXPECT_FALSE(r.std_error_defined);
  EXPECT_EQ(r.std_error[0], 0.0);
  EXPECT_EQ(r.welfare_std_error, 0.0);
  EXPECT_EQ(r.mean_payoff[0], pd.symmetric_payoff(0.5));
}

TEST(RunBatch, DeterministicAcrossRunsAndWorkers) {
  auto pd = make_continuous_pd();
  auto plan = synthesize_plan(pd, 1.0, 30.0, 0.33).plan.to_piecewise();
  auto config = both(plan, 0.33);
  config.error_rate = 0.1;
  config.replications = 3000;
  config.master_seed = 77;
  config.keep_episode_records = true;
  config.workers = 1;
  auto a = run_batch(pd, config);
  auto b = run_batch(pd, config);
  config.workers = 8;
  auto c = run_batch(pd, config);
  for (const auto* other : {&b, &c}) {
    EXPECT_EQ(a.mean_payoff, other->mean_payoff);
    EXPECT_EQ(a.std_error, other->std_error);
    EXPECT_EQ(a.mean_welfare, other->mean_welfare);
    ASSERT_EQ(a.episodes.size(), other->episodes.size());
    for (std::size_t i = 0; i < a.episodes.size(); ++i) {
      EXPECT_EQ(a.episodes[i].payoffs, other->episodes[i].payoffs);
    }
  }
  config.master_seed = 78;
  EXPECT_NE(run_batch(pd, config).mean_welfare, a.mean_welfare);
}

TEST(RunBatch, ErrorFreeMeanMatchesExpectedPayoff) {
  auto pd = make_continuous_pd();
  auto mpc = synthesize_plan(pd, 1.0, 10.0, 0.33).plan;
  auto config = both(mpc.to_piecewise(), 0.33);
  config.replications = 20000;
  auto r = run_batch(pd, config);
  EXPECT_NEAR(r.mean_welfare, expected_payoff(pd, mpc, 1.0, 10.0), 4 * r.welfare_std_error);
  EXPECT_EQ(r.mean_payoff[0], r.mean_payoff[1]);
}

TEST(RunBatch, LimitedRetaliationBeatsGrimTriggerUnderNoise) {
  auto pd = make_continuous_pd();
  auto plan = synthesize_plan(pd, 1.0, 50.0, 0.33).plan.to_piecewise();
  auto lr = both(plan, 0.33);
  lr.error_rate = 0.3;
  lr.replications = 2000;
  auto gt = lr;
  gt.agents[0].kind = gt.agents[1].kind = StrategyKind::kGrimTrigger;
  EXPECT_GT(run_batch(pd, lr).mean_welfare, run_batch(pd, gt).mean_welfare);
}

}  // namespace
}  // namespace revision_eq
