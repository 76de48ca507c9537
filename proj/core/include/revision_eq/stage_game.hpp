#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace revision_eq {

/// Player i's stage payoff as a function of (own action, opponent action).
using PayoffFn = std::function<double(double own, double other)>;
/// Closed-form best response to an opponent action, when one is known.
using BestResponseFn = std::function<double(double other)>;

/// +1 when larger actions are more cooperative (prisoner's dilemma),
/// -1 when smaller actions are (Cournot quantities).
enum class Orientation : int { kIncreasing = 1, kDecreasing = -1 };

/// Symmetric two-player stage game on an action interval [lo, hi].
///
/// "More cooperative" is measured by the cooperation level
/// cl(a) = orientation * (a - a^N), so every monotonicity statement in the
/// library is phrased in cooperation level and the PD and Cournot builtins
/// share one code path. Instances are immutable and cheap to copy.
class StageGame {
 public:
  /// Builds a game from a payoff function. Without a closed-form best
  /// response, best responses are found by golden-section search (own payoff
  /// is assumed unimodal in own action). Throws DomainError when the
  /// interval or the two reference actions are inconsistent, or when the
  /// payoff is non-finite on a sampled grid of the action rectangle.
  static StageGame custom(std::string name, double action_lo, double action_hi,
                          double nash_action, double optimal_action,
                          PayoffFn payoff, BestResponseFn best_response = {});

  const std::string& name() const { return impl_->name; }
  double action_lo() const { return impl_->lo; }
  double action_hi() const { return impl_->hi; }
  double nash_action() const { return impl_->nash; }
  double optimal_action() const { return impl_->optimal; }
  Orientation orientation() const { return impl_->orientation; }
  int sign() const { return static_cast<int>(impl_->orientation); }
  bool has_closed_form_best_response() const {
    return static_cast<bool>(impl_->best_response);
  }

  /// pi_i(own, other); both actions must lie in the action interval.
  double payoff(double own, double other) const;
  /// pi(a) = pi_i(a, a).
  double symmetric_payoff(double a) const;
  /// pi^N = pi(a^N).
  double nash_payoff() const;
  /// argmax over own action; ties go to the action closest to a^N.
  double best_response(double other) const;
  /// G(a) = max_ai pi_i(ai, a) - pi_i(a, a).
  double deviation_gain(double a) const;
  /// L(a) = pi(a) - pi(a^N).
  double retaliation_loss(double a) const;

  double cooperation_level(double a) const {
    return sign() * (a - impl_->nash);
  }
  double action_at_level(double level) const {
    return impl_->nash + sign() * level;
  }
  /// |a* - a^N|, the cooperation level of the optimal action.
  double max_cooperation_level() const { return cooperation_level(impl_->optimal); }
  /// Clips a into the cooperative interval between a^N and a*.
  double clip_cooperative(double a) const;
  /// Of two actions, the one with the lower cooperation level.
  double less_cooperative(double a, double b) const {
    return cooperation_level(a) <= cooperation_level(b) ? a : b;
  }
  double more_cooperative(double a, double b) const {
    return cooperation_level(a) >= cooperation_level(b) ? a : b;
  }
  bool in_action_interval(double a) const;

 private:
  struct Impl {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    double nash = 0.0;
    double optimal = 0.0;
    Orientation orientation = Orientation::kIncreasing;
    PayoffFn payoff;
    BestResponseFn best_response;
  };

  explicit StageGame(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  void require_action(double a, const char* what) const;
  double searched_best_response(double other) const;

  std::shared_ptr<const Impl> impl_;
};

/// Continuous prisoner's dilemma with B(a) = 2a, C(a) = a^2:
/// pi_i = 2 a_j - a_i^2 on [0, 1], a^N = 0, a* = 1.
StageGame make_continuous_pd();

/// Linear-demand Cournot duopoly with price p0 - b(q_i + q_j) and unit cost c,
/// on [0, (p0 - c)/b]; q^N = (p0 - c)/(3b), q* = (p0 - c)/(4b).
StageGame make_cournot(double p0, double c, double b);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double worst_violation = 0.0;
};

struct GameValidationReport {
  std::vector<ValidationCheck> checks;
  int grid_size = 0;

  bool all_passed() const;
};

/// Samples the stage-game assumptions on a uniform grid: pi, G and L strictly
/// increasing in cooperation level on [a^N, a*], G >= 0 on the whole action
/// interval and L(a^N) = 0. Failures are reported, never thrown.
GameValidationReport validate_game(const StageGame& game, int grid_size);

}  // namespace revision_eq
