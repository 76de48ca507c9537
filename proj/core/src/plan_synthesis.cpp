#include "revision_eq/plan_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "revision_eq/equilibrium_check.hpp"
#include "revision_eq/errors.hpp"

namespace revision_eq {

namespace {

constexpr double kBisectionTolerance = 1e-10;
constexpr double kSlopeGuard = 1e-9;
constexpr double kBoundaryOffset = 1e-7;
constexpr double kNearTrivialFraction = 0.01;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(fmt::format("{} must be finite and > 0, got {}", what, v));
  }
}

void require_k(double k) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError(fmt::format("k must lie in (0,1), got {}", k));
}

// Largest cooperation level in [lo_level, hi_level] accepted by `feasible`,
// assuming the feasible set is an interval starting at lo_level. Returns an
// action that `feasible` accepted (or the lower bound itself).
template <typename Pred>
double most_cooperative_feasible(const StageGame& game, double lo_level, double hi_level,
                                 Pred&& feasible) {
  const double hi_action =
      hi_level >= game.max_cooperation_level() ? game.optimal_action() : game.action_at_level(hi_level);
  if (feasible(hi_action)) return hi_action;
  double lo_action = game.action_at_level(lo_level);
  while (hi_level - lo_level > kBisectionTolerance) {
    double mid_level = 0.5 * (lo_level + hi_level);
    double mid = game.action_at_level(mid_level);
    if (feasible(mid)) {
      lo_level = mid_level;
      lo_action = mid;
    } else {
      hi_level = mid_level;
    }
  }
  return lo_action;
}

}  // namespace

double last_revision_mass(double lambda, double lo, double hi) {
  if (hi <= lo) return 0.0;
  // e^{-lambda lo} (1 - e^{-lambda (hi - lo)}) keeps precision for thin slices.
  return std::exp(-lambda * lo) * -std::expm1(-lambda * (hi - lo));
}

int choose_slot_count(double lambda, double T, double k, const SlotCountPolicy& policy) {
  require_positive(lambda, "lambda");
  require_positive(T, "T");
  require_k(k);
  if (!(policy.tail_mass > 0.0) || policy.max_slots < 1) {
    throw DomainError("slot policy needs tail_mass > 0 and max_slots >= 1");
  }
  const double kappa = 1.0 - k;
  int c = 1;
  double ultimate = T * kappa;
  while (lambda * ultimate > policy.tail_mass && c < policy.max_slots) {
    ++c;
    ultimate *= kappa;
  }
  return c;
}

double terminal_action(const StageGame& game, double lambda, double tau, double epsilon) {
  require_positive(lambda, "lambda");
  require_positive(tau, "tau");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  const double stay = std::exp(-lambda * tau);
  const double revise = -std::expm1(-lambda * tau);
  return most_cooperative_feasible(game, 0.0, game.max_cooperation_level(), [&](double a) {
    return game.deviation_gain(a) * stay <= game.retaliation_loss(a) * revise + epsilon;
  });
}

double recurrence_step(const StageGame& game, double lambda, double tau_next, double a_next) {
  require_positive(lambda, "lambda");
  require_positive(tau_next, "tau_next");
  const double next_level = game.cooperation_level(a_next);
  const double top = game.max_cooperation_level();
  if (next_level < -1e-12 || next_level > top + 1e-12 || !game.in_action_interval(a_next)) {
    throw DomainError(fmt::format("next action {} outside the cooperative interval", a_next));
  }
  const double budget = game.retaliation_loss(a_next) * std::expm1(lambda * tau_next);
  const double self_gain = game.deviation_gain(a_next);
  if (self_gain > budget + 1e-12 * std::max(1.0, std::abs(budget))) {
    throw InfeasibleError(fmt::format(
        "recurrence infeasible: G({}) = {} exceeds retaliation budget {}", a_next, self_gain,
        budget));
  }
  const double found = most_cooperative_feasible(
      game, std::clamp(next_level, 0.0, top), top,
      [&](double a) { return game.deviation_gain(a) <= budget; });
  // Inside the rounding slack above, a_next itself is the answer.
  return game.cooperation_level(found) < next_level ? a_next : found;
}

double deviation_gain_slope(const StageGame& game, double x) {
  const double lo = game.action_lo();
  const double hi = game.action_hi();
  const double h = 1e-6 * (hi - lo);
  auto G = [&](double a) { return game.deviation_gain(a); };
  // Second-order one-sided stencils at the interval ends.
  if (x - h < lo) return (-3.0 * G(x) + 4.0 * G(x + h) - G(x + 2.0 * h)) / (2.0 * h);
  if (x + h > hi) return (3.0 * G(x) - 4.0 * G(x - h) + G(x - 2.0 * h)) / (2.0 * h);
  return (G(x + h) - G(x - h)) / (2.0 * h);
}

double gt_ode_rate(const StageGame& game, double lambda, double x) {
  const double range = game.max_cooperation_level();
  double level = game.cooperation_level(x);
  double at = x;
  if (std::abs(level) <= kBoundaryOffset * range) {
    // G'(a^N) = 0 for well-behaved games; use the one-sided limit.
    at = game.action_at_level(kBoundaryOffset * range);
  }
  double slope = deviation_gain_slope(game, at);
  if (std::abs(slope) < kSlopeGuard) return std::numeric_limits<double>::quiet_NaN();
  return lambda * (game.retaliation_loss(at) - game.deviation_gain(at)) / slope;
}

OdeTail gt_ode_tail(const StageGame& game, double lambda, double t_start, int steps) {
  require_positive(lambda, "lambda");
  if (!(t_start >= 0.0) || !std::isfinite(t_start)) {
    throw DomainError(fmt::format("t_start must be >= 0, got {}", t_start));
  }
  if (steps < 10) throw DomainError(fmt::format("gt_ode_tail needs >= 10 steps, got {}", steps));

  OdeTail out;
  out.plan.horizon = 0.0;
  if (t_start == 0.0) return out;

  const double h = t_start / steps;
  const double top = game.max_cooperation_level();
  auto clip = [&](double x) {
    double level = std::clamp(game.cooperation_level(x), 0.0, top);
    return level == top ? game.optimal_action() : game.action_at_level(level);
  };

  out.times.push_back(0.0);
  out.values.push_back(game.nash_action());
  double x = game.nash_action();
  for (int i = 1; i <= steps; ++i) {
    double k1 = gt_ode_rate(game, lambda, x);
    double k2 = gt_ode_rate(game, lambda, clip(x + 0.5 * h * k1));
    double k3 = gt_ode_rate(game, lambda, clip(x + 0.5 * h * k2));
    double k4 = gt_ode_rate(game, lambda, clip(x + h * k3));
    double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) {
      out.truncated = true;
      break;
    }
    x = clip(next);
    out.times.push_back(i == steps ? t_start : i * h);
    out.values.push_back(x);
  }

  const std::size_t m = out.times.size() - 1;
  out.plan.horizon = out.times.back();
  for (std::size_t i = m; i-- > 0;) {
    out.plan.breakpoints.push_back(i == 0 ? 0.0 : -out.times[i]);
    out.plan.actions.push_back(out.values[i + 1]);
  }
  return out;
}

namespace {

// Slot-c endpoint margins for a candidate a_c when the ultimate slot follows
// the grim-trigger trajectory clipped at a_c.
struct TailedSlot {
  const StageGame& game;
  double lambda;
  double k;
  double u;       // kappa^c T
  double t_left;  // kappa^(c-1) T
  const PiecewisePlan& tail;

  std::vector<double> clipped(double a) const {
    std::vector<double> out;
    out.reserve(tail.actions.size());
    for (double x : tail.actions) out.push_back(game.less_cooperative(x, a));
    return out;
  }

  // Same code path as the verifier, so the epsilon bound is met exactly.
  double right_margin(double a) const {
    PiecewisePlan candidate;
    candidate.horizon = t_left;
    candidate.breakpoints.push_back(-u);
    candidate.actions.push_back(a);
    auto actions = clipped(a);
    candidate.breakpoints.insert(candidate.breakpoints.end(), tail.breakpoints.begin(),
                                 tail.breakpoints.end());
    candidate.actions.insert(candidate.actions.end(), actions.begin(), actions.end());
    return incentive_margin(game, candidate, k, lambda, u);
  }

  double left_margin(double a) const {
    return game.retaliation_loss(a) * last_revision_mass(lambda, u, t_left) -
           game.deviation_gain(a) * std::exp(-lambda * t_left);
  }
};

}  // namespace

SynthesisResult synthesize_plan(const StageGame& game, double lambda, double T, double k,
                                const SynthesisOptions& options) {
  require_positive(lambda, "lambda");
  require_positive(T, "T");
  require_k(k);
  if (!(options.epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");

  const int c = choose_slot_count(lambda, T, k, options.slots);
  const auto bounds = slot_boundaries(T, k, c);
  const double kappa = 1.0 - k;
  // Remaining-time length of slot n (1-based); slot c+1 is the ultimate slot.
  auto slot_length = [&](int n) { return bounds[n] - bounds[n - 1]; };
  const double u = -bounds[c];

  SynthesisResult result;
  MpcPlan& plan = result.plan;
  plan.horizon = T;
  plan.k = k;
  plan.kappa = kappa;
  plan.epsilon = options.epsilon;
  plan.tail_policy = options.tail_policy;
  plan.actions.assign(static_cast<std::size_t>(c), game.nash_action());

  // a_c must also satisfy the exact recurrence of slot c-1 against itself; the
  // epsilon slack alone can break that when L(a_c) is tiny.
  const double self_cap =
      c >= 2 ? terminal_action(game, lambda, slot_length(c), 0.0) : game.optimal_action();

  double terminal = game.nash_action();
  bool used_ode = false;
  if (options.tail_policy == TailPolicy::kGtOde) {
    OdeTail tail = gt_ode_tail(game, lambda, u, options.ode_steps);
    OdeTail reach = gt_ode_tail(game, lambda, -bounds[c - 1], options.ode_steps);
    if (tail.truncated || reach.truncated) {
      result.tail_truncated = true;
      result.warnings.push_back(
          "grim-trigger ODE hit a singular deviation-gain slope; falling back to the "
          "epsilon-relaxed ultimate slot");
    } else {
      TailedSlot slot{game, lambda, k, u, -bounds[c - 1], tail.plan};
      const double cap = game.less_cooperative(reach.values.back(), self_cap);
      terminal = most_cooperative_feasible(
          game, 0.0, game.cooperation_level(cap), [&](double a) {
            return slot.right_margin(a) >= -options.epsilon &&
                   slot.left_margin(a) >= -options.epsilon;
          });
      plan.tail_actions = slot.clipped(terminal);
      plan.tail_breakpoints = tail.plan.breakpoints;
      plan.ultimate_action = plan.tail_actions.front();
      used_ode = true;
    }
  }
  if (!used_ode) {
    plan.tail_policy = TailPolicy::kEpsilonRelax;
    // Retaliation window of a deviation at -kappa^c T spans the ultimate slot's
    // share k * kappa^c T; that endpoint binds the whole penultimate slot.
    terminal = game.less_cooperative(terminal_action(game, lambda, u - kappa * u, options.epsilon),
                                     self_cap);
    plan.ultimate_action = terminal;
  }
  plan.actions[c - 1] = terminal;

  for (int n = c - 1; n >= 1; --n) {
    plan.actions[n - 1] = recurrence_step(game, lambda, slot_length(n + 1), plan.actions[n]);
  }

  const double top = game.max_cooperation_level();
  if (game.cooperation_level(terminal) <= kBisectionTolerance) {
    result.trivial = true;
    result.warnings.push_back("terminal action collapsed to the stage Nash action; the plan is "
                              "the trivial all-defect plan");
  } else if (game.cooperation_level(plan.actions.front()) < kNearTrivialFraction * top) {
    result.trivial = true;
    result.warnings.push_back(fmt::format(
        "plan sustains negligible cooperation (most cooperative action {} is within 1% of a^N)",
        plan.actions.front()));
  }
  return result;
}

PiecewisePlan bound_plan(const StageGame& game, const PiecewisePlan& plan) {
  PiecewisePlan out = plan;
  for (double& a : out.actions) a = game.clip_cooperative(a);
  return out;
}

PiecewisePlan monotonize_plan(const StageGame& game, const PiecewisePlan& plan) {
  PiecewisePlan out = plan;
  auto& a = out.actions;
  auto level = [&](double x) { return game.cooperation_level(x); };
  for (;;) {
    // The prefix before j is non-increasing, so the first rise marks j.
    std::size_t j = 1;
    while (j < a.size() && level(a[j]) <= level(a[j - 1])) ++j;
    if (j >= a.size()) break;
    std::size_t i = 0;
    while (level(a[i]) >= level(a[j])) ++i;
    std::fill(a.begin() + static_cast<std::ptrdiff_t>(i), a.begin() + static_cast<std::ptrdiff_t>(j),
              a[j]);
  }
  return out;
}

double expected_payoff(const StageGame& game, const PiecewisePlan& plan, double lambda,
                       double horizon) {
  require_positive(lambda, "lambda");
  if (plan.empty()) throw DomainError("expected_payoff of an empty plan");
  if (!(horizon >= 0.0) || horizon > plan.horizon) {
    throw DomainError(
        fmt::format("horizon {} outside [0, {}] of the plan", horizon, plan.horizon));
  }
  double value = game.symmetric_payoff(plan.action_at(horizon)) * std::exp(-lambda * horizon);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    double lo = plan.segment_lo(i);
    if (lo >= horizon) continue;
    double hi = std::min(plan.segment_hi(i), horizon);
    value += game.symmetric_payoff(plan.actions[i]) * last_revision_mass(lambda, lo, hi);
  }
  return value;
}

double expected_payoff(const StageGame& game, const MpcPlan& plan, double lambda,
                       double horizon) {
  return expected_payoff(game, plan.to_piecewise(), lambda, horizon);
}

}  // namespace revision_eq
