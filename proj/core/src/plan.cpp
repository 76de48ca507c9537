#include "revision_eq/plan.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "revision_eq/errors.hpp"

namespace revision_eq {

std::size_t PiecewisePlan::segment_at(double remaining) const {
  if (actions.empty()) throw DomainError("empty plan has no segments");
  double clock = -remaining;
  // First breakpoint >= clock; segments are right-closed in clock time.
  auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), clock);
  if (it == breakpoints.end()) return actions.size() - 1;
  return static_cast<std::size_t>(it - breakpoints.begin());
}

double PiecewisePlan::action_at(double remaining) const { return actions[segment_at(remaining)]; }

void PiecewisePlan::validate() const {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InputError(fmt::format("plan horizon must be finite and >= 0, got {}", horizon));
  }
  if (breakpoints.size() != actions.size()) {
    throw InputError(fmt::format("plan has {} breakpoints but {} actions", breakpoints.size(),
                                 actions.size()));
  }
  if (!(relaxed_tail >= 0.0) || relaxed_tail > horizon) {
    throw InputError(fmt::format("relaxed tail {} outside [0, {}]", relaxed_tail, horizon));
  }
  if (actions.empty()) return;
  double prev = -horizon;
  for (double b : breakpoints) {
    if (!(b > prev)) {
      throw InputError(fmt::format("breakpoints must increase strictly from -T; {} after {}", b,
                                   prev));
    }
    prev = b;
  }
  if (breakpoints.back() != 0.0) throw InputError("last breakpoint must be the deadline 0");
  for (double a : actions) {
    if (!std::isfinite(a)) throw InputError("plan action is not finite");
  }
}

std::vector<double> slot_boundaries(double T, double k, int c) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError(fmt::format("T must be > 0, got {}", T));
  if (!(k > 0.0 && k < 1.0)) throw DomainError(fmt::format("k must lie in (0,1), got {}", k));
  if (c < 1) throw DomainError(fmt::format("slot count must be >= 1, got {}", c));
  const double kappa = 1.0 - k;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(c) + 1);
  double length = T;
  for (int n = 0; n <= c; ++n) {
    out.push_back(-length);
    length *= kappa;
  }
  return out;
}

std::vector<double> MpcPlan::boundaries() const {
  return slot_boundaries(horizon, k, static_cast<int>(actions.size()));
}

double MpcPlan::ultimate_start() const { return -boundaries().back(); }

PiecewisePlan MpcPlan::to_piecewise() const {
  PiecewisePlan out;
  out.horizon = horizon;
  auto bounds = boundaries();
  for (std::size_t n = 0; n < actions.size(); ++n) {
    out.breakpoints.push_back(bounds[n + 1]);
    out.actions.push_back(actions[n]);
  }
  if (tail_policy == TailPolicy::kGtOde && !tail_actions.empty()) {
    for (std::size_t i = 0; i < tail_actions.size(); ++i) {
      out.breakpoints.push_back(tail_breakpoints[i]);
      out.actions.push_back(tail_actions[i]);
    }
  } else {
    out.breakpoints.push_back(0.0);
    out.actions.push_back(ultimate_action);
  }
  out.relaxed_tail = -bounds.back();
  return out;
}

void MpcPlan::check_invariants(const StageGame& game, double tolerance) const {
  if (!(horizon > 0.0)) throw InputError("MPC plan horizon must be > 0");
  if (!(k > 0.0 && k < 1.0)) throw InputError(fmt::format("k must lie in (0,1), got {}", k));
  if (std::abs(kappa - (1.0 - k)) > 1e-15) throw InputError("kappa must equal 1 - k");
  if (actions.empty()) throw InputError("MPC plan needs at least one slot");
  if (!(epsilon >= 0.0)) throw InputError("epsilon must be >= 0");
  if (tail_breakpoints.size() != tail_actions.size()) {
    throw InputError("tail breakpoints and actions differ in length");
  }
  const double top = game.max_cooperation_level();
  auto bounded = [&](double a) {
    double level = game.cooperation_level(a);
    return level >= -tolerance && level <= top + tolerance;
  };
  double prev_level = top + tolerance;
  auto check = [&](double a, const char* where) {
    if (!bounded(a)) {
      throw InputError(fmt::format("{} action {} outside the cooperative interval", where, a));
    }
    double level = game.cooperation_level(a);
    if (level > prev_level + tolerance) {
      throw InputError(fmt::format("{} action {} is more cooperative than an earlier slot", where,
                                   a));
    }
    prev_level = level;
  };
  for (double a : actions) check(a, "slot");
  if (tail_policy == TailPolicy::kGtOde && !tail_actions.empty()) {
    for (double a : tail_actions) check(a, "tail");
  } else {
    check(ultimate_action, "ultimate");
  }
  to_piecewise().validate();
}

PiecewisePlan LrStrategy::piecewise() const {
  return std::visit(
      [](const auto& p) -> PiecewisePlan {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, MpcPlan>) {
          return p.to_piecewise();
        } else {
          return p;
        }
      },
      plan);
}

void LrStrategy::validate() const {
  if (!(k > 0.0 && k < 1.0)) throw InputError(fmt::format("k must lie in (0,1), got {}", k));
  if (const auto* mpc = std::get_if<MpcPlan>(&plan); mpc && mpc->k != k) {
    throw InputError("strategy k does not match the MPC plan's slot geometry");
  }
  piecewise().validate();
}

}  // namespace revision_eq
