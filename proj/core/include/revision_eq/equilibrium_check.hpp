#pragma once

#include <utility>
#include <vector>

#include "revision_eq/plan.hpp"
#include "revision_eq/stage_game.hpp"

namespace revision_eq {

enum class Verdict { kPass, kPassWithEpsilon, kFail };

const char* to_string(Verdict v);

/// Incentive margins of an LR profile over a time grid.
struct SpeReport {
  /// Checked clock times -t.
  std::vector<double> grid;
  /// Expected retaliation loss minus expected deviation gain, per grid time.
  std::vector<double> margins;
  double min_margin = 0.0;
  double min_margin_time = 0.0;
  Verdict verdict = Verdict::kPass;
  double epsilon_used = 0.0;

  bool accepted() const { return verdict != Verdict::kFail; }
};

/// Offset used for one-sided limits at plan breakpoints.
inline constexpr double kBreakpointOffset = 1e-9;

/// integral_{t-kt}^{t} L(x(s)) lambda e^{-lambda s} ds - G(x(t)) e^{-lambda t},
/// with the integral summed exactly over plan segments.
double incentive_margin(const StageGame& game, const PiecewisePlan& plan, double k,
                        double lambda, double t);

/// Evaluates incentive_margin at every breakpoint, at both one-sided limits
/// around it, at the ends of the checked range, and on a uniform fill, for
/// remaining times in [max(plan.relaxed_tail, 1e-9), T]. min_margin >= 0 is a
/// pass, >= -epsilon a pass_with_epsilon, anything lower a fail.
SpeReport verify_spe(const StageGame& game, const PiecewisePlan& plan, double k, double lambda,
                     int grid_points, double epsilon);

/// Same quantity as incentive_margin with the retaliation integral done by
/// composite midpoint quadrature, blind to the segment structure. Test oracle.
double quadrature_oracle_margin(const StageGame& game, const PiecewisePlan& plan, double k,
                                double lambda, double t, long n_steps);

/// Margins at the two ends of slot n (1-based) of an MPC plan: the limit
/// t -> kappa^(n-1) T and t = kappa^n T. The second is the recurrence bound.
std::pair<double, double> decomposed_slot_check(const StageGame& game, const MpcPlan& plan,
                                                double lambda, int n);

}  // namespace revision_eq
