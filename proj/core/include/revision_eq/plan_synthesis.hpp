#pragma once

#include <string>
#include <vector>

#include "revision_eq/plan.hpp"
#include "revision_eq/stage_game.hpp"

namespace revision_eq {

/// How many geometric slots precede the ultimate slot.
struct SlotCountPolicy {
  /// Smallest c with lambda * kappa^c * T <= tail_mass.
  double tail_mass = 0.01;
  int max_slots = 200;
};

int choose_slot_count(double lambda, double T, double k, const SlotCountPolicy& policy = {});

/// Most cooperative a in [a^N, a*] with
///   G(a) e^{-lambda tau} <= L(a) (1 - e^{-lambda tau}) + epsilon,
/// found by bisection (absolute tolerance 1e-10) and always returned from the
/// feasible side. Returns a^N when no cooperative action qualifies.
double terminal_action(const StageGame& game, double lambda, double tau, double epsilon);

/// Backward-induction step: most cooperative a_n, at least as cooperative as
/// a_next and at most a*, with G(a_n) <= L(a_next) (e^{lambda tau_next} - 1).
/// Throws InfeasibleError if a_next itself violates the constraint.
double recurrence_step(const StageGame& game, double lambda, double tau_next, double a_next);

struct SynthesisOptions {
  double epsilon = 1e-6;
  TailPolicy tail_policy = TailPolicy::kEpsilonRelax;
  SlotCountPolicy slots;
  /// RK4 steps for the grim-trigger tail (kGtOde only).
  int ode_steps = 256;
};

struct SynthesisResult {
  MpcPlan plan;
  /// a_c collapsed to a^N, or the whole plan sustains negligible cooperation.
  bool trivial = false;
  bool tail_truncated = false;
  std::vector<std::string> warnings;
};

/// Welfare-maximizing bounded MPC plan: terminal action on the last slot,
/// then recurrence_step backwards to slot 1.
SynthesisResult synthesize_plan(const StageGame& game, double lambda, double T, double k,
                                const SynthesisOptions& options = {});

/// Clips every action into the cooperative interval [a^N, a*].
PiecewisePlan bound_plan(const StageGame& game, const PiecewisePlan& plan);

/// Repeatedly overwrites a less cooperative span with the first later segment
/// that is more cooperative, until cooperation is non-increasing in time.
PiecewisePlan monotonize_plan(const StageGame& game, const PiecewisePlan& plan);

/// Grim-trigger plan trajectory near the deadline.
struct OdeTail {
  /// Remaining times 0 = t_0 < ... < t_steps = t_start and x_g at each.
  std::vector<double> times;
  std::vector<double> values;
  /// One segment per step; a segment takes the trajectory value at its
  /// earlier (farther from the deadline) end.
  PiecewisePlan plan;
  bool truncated = false;
};

/// Integrates dx/d(-t) = lambda (G(x) - L(x)) / G'(x) from x(0) = a^N out to
/// remaining time t_start with fixed-step RK4. Steps where |G'| < 1e-9 away
/// from a^N truncate the trajectory. t_start == 0 gives an empty plan.
OdeTail gt_ode_tail(const StageGame& game, double lambda, double t_start, int steps);

/// Right-hand side of the tail ODE in remaining time: dx/dt = lambda (L - G) / G'.
/// Returns NaN where |G'| < 1e-9 (except at a^N, where the one-sided limit is used).
double gt_ode_rate(const StageGame& game, double lambda, double x);

/// Numerical derivative of the deviation gain.
double deviation_gain_slope(const StageGame& game, double x);

/// V(x, horizon) = pi(x(horizon)) e^{-lambda horizon}
///                 + integral_0^horizon pi(x(t)) lambda e^{-lambda t} dt,
/// evaluated exactly segment by segment.
double expected_payoff(const StageGame& game, const PiecewisePlan& plan, double lambda,
                       double horizon);
double expected_payoff(const StageGame& game, const MpcPlan& plan, double lambda,
                       double horizon);

/// e^{-lambda lo} - e^{-lambda hi}: probability that the last revision
/// opportunity falls at remaining time in [lo, hi).
double last_revision_mass(double lambda, double lo, double hi);

}  // namespace revision_eq
