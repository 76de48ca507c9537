#include "revision_eq/stage_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "revision_eq/errors.hpp"

namespace revision_eq {

namespace {

constexpr double kGoldenTolerance = 1e-12;
constexpr double kTieTolerance = 1e-12;
constexpr int kFiniteSamples = 11;

}  // namespace

StageGame StageGame::custom(std::string name, double action_lo, double action_hi,
                            double nash_action, double optimal_action,
                            PayoffFn payoff, BestResponseFn best_response) {
  if (!payoff) throw DomainError("stage game needs a payoff function");
  if (!(std::isfinite(action_lo) && std::isfinite(action_hi)) ||
      !(action_lo < action_hi)) {
    throw DomainError(fmt::format("invalid action interval [{}, {}]", action_lo, action_hi));
  }
  auto inside = [&](double a) { return a >= action_lo && a <= action_hi; };
  if (!inside(nash_action) || !inside(optimal_action)) {
    throw DomainError(fmt::format(
        "nash action {} and optimal action {} must lie in [{}, {}]", nash_action,
        optimal_action, action_lo, action_hi));
  }
  if (nash_action == optimal_action) {
    throw DomainError("nash and optimal actions coincide; no room for cooperation");
  }

  for (int i = 0; i < kFiniteSamples; ++i) {
    for (int j = 0; j < kFiniteSamples; ++j) {
      double ai = action_lo + (action_hi - action_lo) * i / (kFiniteSamples - 1);
      double aj = action_lo + (action_hi - action_lo) * j / (kFiniteSamples - 1);
      if (!std::isfinite(payoff(ai, aj))) {
        throw DomainError(fmt::format("payoff is not finite at ({}, {})", ai, aj));
      }
    }
  }

  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->lo = action_lo;
  impl->hi = action_hi;
  impl->nash = nash_action;
  impl->optimal = optimal_action;
  impl->orientation =
      optimal_action > nash_action ? Orientation::kIncreasing : Orientation::kDecreasing;
  impl->payoff = std::move(payoff);
  impl->best_response = std::move(best_response);
  return StageGame(std::move(impl));
}

bool StageGame::in_action_interval(double a) const {
  return a >= impl_->lo && a <= impl_->hi;
}

void StageGame::require_action(double a, const char* what) const {
  if (!in_action_interval(a)) {
    throw DomainError(fmt::format("{}: action {} outside [{}, {}] of game '{}'", what, a,
                                  impl_->lo, impl_->hi, impl_->name));
  }
}

double StageGame::payoff(double own, double other) const {
  require_action(own, "payoff");
  require_action(other, "payoff");
  return impl_->payoff(own, other);
}

double StageGame::symmetric_payoff(double a) const {
  require_action(a, "symmetric_payoff");
  return impl_->payoff(a, a);
}

double StageGame::nash_payoff() const { return impl_->payoff(impl_->nash, impl_->nash); }

double StageGame::best_response(double other) const {
  require_action(other, "best_response");
  if (impl_->best_response) {
    return std::clamp(impl_->best_response(other), impl_->lo, impl_->hi);
  }
  return searched_best_response(other);
}

double StageGame::searched_best_response(double other) const {
  const auto& f = impl_->payoff;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = impl_->lo;
  double b = impl_->hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1, other);
  double f2 = f(x2, other);
  while (b - a > kGoldenTolerance * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2, other);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1, other);
    }
  }

  // Golden section can stall on plateaus; endpoints and a^N are candidates too.
  const double candidates[] = {0.5 * (a + b), impl_->lo, impl_->hi, impl_->nash};
  double best = candidates[0];
  double best_value = f(best, other);
  for (double c : candidates) {
    double v = f(c, other);
    double scale = std::max(1.0, std::abs(best_value));
    if (v > best_value + kTieTolerance * scale) {
      best = c;
      best_value = v;
    } else if (v >= best_value - kTieTolerance * scale &&
               std::abs(c - impl_->nash) < std::abs(best - impl_->nash)) {
      best = c;
      best_value = std::max(best_value, v);
    }
  }
  return best;
}

double StageGame::deviation_gain(double a) const {
  require_action(a, "deviation_gain");
  double br = best_response(a);
  // A searched optimum can land a hair below pi(a, a); G is non-negative by definition.
  return std::max(0.0, impl_->payoff(br, a) - impl_->payoff(a, a));
}

double StageGame::retaliation_loss(double a) const {
  require_action(a, "retaliation_loss");
  return impl_->payoff(a, a) - nash_payoff();
}

double StageGame::clip_cooperative(double a) const {
  double level = std::clamp(cooperation_level(a), 0.0, max_cooperation_level());
  if (level == 0.0) return impl_->nash;
  if (level == max_cooperation_level()) return impl_->optimal;
  return a;
}

StageGame make_continuous_pd() {
  return StageGame::custom(
      "pd", 0.0, 1.0, 0.0, 1.0,
      [](double own, double other) { return 2.0 * other - own * own; },
      [](double) { return 0.0; });
}

StageGame make_cournot(double p0, double c, double b) {
  if (!(std::isfinite(p0) && std::isfinite(c) && std::isfinite(b)) || !(p0 > c) || !(b > 0.0)) {
    throw DomainError(fmt::format("cournot needs p0 > c and b > 0 (got p0={}, c={}, b={})", p0,
                                  c, b));
  }
  const double margin = p0 - c;
  return StageGame::custom(
      fmt::format("cournot(p0={},c={},b={})", p0, c, b), 0.0, margin / b, margin / (3.0 * b),
      margin / (4.0 * b),
      [=](double own, double other) { return (margin - b * (own + other)) * own; },
      [=](double other) { return (margin - b * other) / (2.0 * b); });
}

bool GameValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

GameValidationReport validate_game(const StageGame& game, int grid_size) {
  if (grid_size < 3) throw DomainError("validate_game needs grid_size >= 3");

  GameValidationReport report;
  report.grid_size = grid_size;

  // Cooperation-ordered grid on [a^N, a*].
  std::vector<double> coop(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    coop[i] = game.action_at_level(game.max_cooperation_level() * i / (grid_size - 1));
  }
  coop.back() = game.optimal_action();

  auto strictly_increasing = [&](const char* name, auto&& fn) {
    ValidationCheck check{name, true, 0.0};
    double prev = fn(coop[0]);
    for (int i = 1; i < grid_size; ++i) {
      double cur = fn(coop[i]);
      if (!(cur > prev)) {
        check.passed = false;
        check.worst_violation = std::max(check.worst_violation, prev - cur);
      }
      prev = cur;
    }
    report.checks.push_back(check);
  };
  strictly_increasing("symmetric_payoff_increasing",
                      [&](double a) { return game.symmetric_payoff(a); });
  strictly_increasing("deviation_gain_increasing",
                      [&](double a) { return game.deviation_gain(a); });
  strictly_increasing("retaliation_loss_increasing",
                      [&](double a) { return game.retaliation_loss(a); });

  ValidationCheck nonneg{"deviation_gain_nonnegative", true, 0.0};
  for (int i = 0; i < grid_size; ++i) {
    double a = game.action_lo() + (game.action_hi() - game.action_lo()) * i / (grid_size - 1);
    double g = game.deviation_gain(a);
    if (g < 0.0) {
      nonneg.passed = false;
      nonneg.worst_violation = std::max(nonneg.worst_violation, -g);
    }
  }
  report.checks.push_back(nonneg);

  double loss_at_nash = std::abs(game.retaliation_loss(game.nash_action()));
  report.checks.push_back({"retaliation_loss_zero_at_nash", loss_at_nash <= 1e-12, loss_at_nash});
  return report;
}

}  // namespace revision_eq
