#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "revision_eq/stage_game.hpp"

namespace revision_eq {

/// A piecewise-constant cooperative plan on (-T, 0].
///
/// Segment i covers clock times (breakpoints[i-1], breakpoints[i]] with
/// breakpoints[-1] = -T; the last breakpoint is the deadline 0. Clock times
/// are negative; most functions take the remaining time t = -clock instead.
/// `relaxed_tail` is a remaining-time length at the deadline that the
/// incentive check skips (the ultimate slot of a synthesized plan).
struct PiecewisePlan {
  double horizon = 0.0;
  std::vector<double> breakpoints;
  std::vector<double> actions;
  double relaxed_tail = 0.0;

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }

  /// Action in force at remaining time t; x(T) is the first segment's action.
  double action_at(double remaining) const;
  /// Index of the segment active at remaining time t.
  std::size_t segment_at(double remaining) const;
  /// Remaining-time extent [lo, hi) of segment i.
  double segment_lo(std::size_t i) const { return -breakpoints[i]; }
  double segment_hi(std::size_t i) const { return i == 0 ? horizon : -breakpoints[i - 1]; }

  /// Throws InputError unless breakpoints are strictly increasing in (-T, 0],
  /// end at 0, and match the action count.
  void validate() const;
};

enum class TailPolicy { kEpsilonRelax, kGtOde };

/// Monotone piecewise-constant plan on geometric slots.
///
/// Slot n (1-based) is (-kappa^(n-1) T, -kappa^n T] with kappa = 1 - k and
/// carries actions[n-1]; the ultimate slot (-kappa^c T, 0] carries
/// ultimate_action, or the ODE trajectory in `tail` under TailPolicy::kGtOde.
struct MpcPlan {
  double horizon = 0.0;
  double k = 0.0;
  double kappa = 1.0;
  std::vector<double> actions;
  double ultimate_action = 0.0;
  double epsilon = 0.0;
  TailPolicy tail_policy = TailPolicy::kEpsilonRelax;
  /// Ultimate-slot trajectory (clock-time breakpoints and actions), only
  /// populated under kGtOde.
  std::vector<double> tail_breakpoints;
  std::vector<double> tail_actions;

  std::size_t slot_count() const { return actions.size(); }
  /// [-T, -kappa T, ..., -kappa^c T].
  std::vector<double> boundaries() const;
  /// Remaining time at the start of the ultimate slot, kappa^c T.
  double ultimate_start() const;
  PiecewisePlan to_piecewise() const;

  /// Throws InputError when the slot geometry, boundedness or monotonicity
  /// invariants fail for `game`.
  void check_invariants(const StageGame& game, double tolerance = 1e-12) const;
};

/// {x(.), k}: a cooperative plan plus the retaliation coefficient.
struct LrStrategy {
  std::variant<MpcPlan, PiecewisePlan> plan;
  double k = 0.0;

  PiecewisePlan piecewise() const;
  void validate() const;
};

/// [-T, -kappa T, ..., -kappa^c T] for kappa = 1 - k.
std::vector<double> slot_boundaries(double T, double k, int c);

}  // namespace revision_eq
