#include "revision_eq/equilibrium_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "revision_eq/errors.hpp"
#include "revision_eq/plan_synthesis.hpp"

namespace revision_eq {

namespace {

constexpr double kMinCheckedTime = 1e-9;

void require_margin_args(const PiecewisePlan& plan, double k, double lambda, double t) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError(fmt::format("k must lie in (0,1), got {}", k));
  if (!(lambda > 0.0)) throw DomainError(fmt::format("lambda must be > 0, got {}", lambda));
  if (plan.empty()) throw DomainError("incentive margin of an empty plan");
  if (!(t > 0.0) || t > plan.horizon) {
    throw DomainError(fmt::format("t = {} outside (0, {}]", t, plan.horizon));
  }
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kPassWithEpsilon:
      return "pass_with_epsilon";
    case Verdict::kFail:
      return "fail";
  }
  return "fail";
}

double incentive_margin(const StageGame& game, const PiecewisePlan& plan, double k,
                        double lambda, double t) {
  require_margin_args(plan, k, lambda, t);
  const double window_lo = (1.0 - k) * t;
  const std::size_t first = plan.segment_at(t);
  double loss = 0.0;
  for (std::size_t i = first; i < plan.size(); ++i) {
    double lo = std::max(plan.segment_lo(i), window_lo);
    double hi = std::min(plan.segment_hi(i), t);
    if (hi > lo) loss += game.retaliation_loss(plan.actions[i]) * last_revision_mass(lambda, lo, hi);
    if (plan.segment_lo(i) <= window_lo) break;
  }
  return loss - game.deviation_gain(plan.actions[first]) * std::exp(-lambda * t);
}

SpeReport verify_spe(const StageGame& game, const PiecewisePlan& plan, double k, double lambda,
                     int grid_points, double epsilon) {
  if (grid_points < 100) throw DomainError("verify_spe needs grid_points >= 100");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  if (plan.empty() || !(plan.horizon > 0.0)) throw DomainError("verify_spe of an empty plan");

  const double T = plan.horizon;
  const double floor = std::min(std::max(plan.relaxed_tail, kMinCheckedTime), T);

  std::vector<double> remaining;
  remaining.reserve(static_cast<std::size_t>(grid_points) + 3 * plan.size() + 2);
  auto add = [&](double t) {
    if (t >= floor && t <= T) remaining.push_back(t);
  };
  add(T);
  add(floor);
  for (double b : plan.breakpoints) {
    add(-b);
    add(-b - kBreakpointOffset);
    add(-b + kBreakpointOffset);
  }
  for (int i = 0; i < grid_points; ++i) {
    add(i + 1 == grid_points ? T : floor + (T - floor) * i / (grid_points - 1));
  }
  std::sort(remaining.begin(), remaining.end(), std::greater<>());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());

  SpeReport report;
  report.epsilon_used = epsilon;
  report.grid.reserve(remaining.size());
  report.margins.reserve(remaining.size());
  report.min_margin = std::numeric_limits<double>::infinity();
  for (double t : remaining) {
    double m = incentive_margin(game, plan, k, lambda, t);
    report.grid.push_back(-t);
    report.margins.push_back(m);
    if (m < report.min_margin) {
      report.min_margin = m;
      report.min_margin_time = -t;
    }
  }
  if (report.min_margin >= 0.0) {
    report.verdict = Verdict::kPass;
  } else if (report.min_margin >= -epsilon) {
    report.verdict = Verdict::kPassWithEpsilon;
  } else {
    report.verdict = Verdict::kFail;
  }
  return report;
}

double quadrature_oracle_margin(const StageGame& game, const PiecewisePlan& plan, double k,
                                double lambda, double t, long n_steps) {
  require_margin_args(plan, k, lambda, t);
  if (n_steps < 10000) throw DomainError("quadrature oracle needs n_steps >= 1e4");
  const double lo = (1.0 - k) * t;
  const double h = (t - lo) / static_cast<double>(n_steps);
  double sum = 0.0;
  for (long j = 0; j < n_steps; ++j) {
    double s = lo + (static_cast<double>(j) + 0.5) * h;
    sum += game.retaliation_loss(plan.action_at(s)) * lambda * std::exp(-lambda * s);
  }
  return sum * h - game.deviation_gain(plan.action_at(t)) * std::exp(-lambda * t);
}

std::pair<double, double> decomposed_slot_check(const StageGame& game, const MpcPlan& plan,
                                                double lambda, int n) {
  const int c = static_cast<int>(plan.slot_count());
  if (n < 1 || n > c) throw std::out_of_range(fmt::format("slot {} outside 1..{}", n, c));
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  const auto bounds = plan.boundaries();
  const double start = -bounds[n - 1];  // kappa^(n-1) T
  const double end = -bounds[n];        // kappa^n T
  const double a_n = plan.actions[n - 1];
  const double gain = game.deviation_gain(a_n);

  // Deviation just after -kappa^(n-1) T: the whole window stays inside slot n.
  const double left =
      game.retaliation_loss(a_n) * last_revision_mass(lambda, end, start) -
      gain * std::exp(-lambda * start);

  // Deviation at -kappa^n T: the window (kappa^(n+1) T, kappa^n T] is the next slot.
  const PiecewisePlan pw = plan.to_piecewise();
  const double window_lo = plan.kappa * end;
  double loss = 0.0;
  for (std::size_t i = static_cast<std::size_t>(n); i < pw.size(); ++i) {
    double lo = std::max(pw.segment_lo(i), window_lo);
    double hi = std::min(pw.segment_hi(i), end);
    if (hi > lo) loss += game.retaliation_loss(pw.actions[i]) * last_revision_mass(lambda, lo, hi);
    if (pw.segment_lo(i) <= window_lo) break;
  }
  const double right = loss - gain * std::exp(-lambda * end);
  return {left, right};
}

}  // namespace revision_eq
