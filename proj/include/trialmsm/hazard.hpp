#pragma once

#include "trialmsm/numerics.hpp"

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace trialmsm {

struct ConstantHazard {
  double rate;
};

/// Piecewise-constant hazard on [breaks[i], breaks[i+1]); the last interval
/// extends to infinity. breaks[0] == 0.
struct PiecewiseHazard {
  std::vector<double> breaks;
  std::vector<double> rates;
  std::vector<double> cumulative_at_breaks;  // Lambda(0, breaks[i])
};

struct WeibullHazard {
  double shape;
  double scale;
};

/// How a post-progression hazard sees time. clock_forward keeps calendar time
/// since randomization (Markov); clock_reset evaluates the inner hazard at
/// time since progression (semi-Markov).
enum class ClockMode { clock_forward, clock_reset };

using BaseHazard = std::variant<ConstantHazard, PiecewiseHazard, WeibullHazard>;

class InvalidHazard : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One transition-hazard function lambda(t), immutable after construction.
///
/// An entry-shifted spec wraps a base hazard and needs the time the subject
/// entered the source state at every evaluation.
class HazardSpec {
 public:
  static HazardSpec constant(double rate);
  static HazardSpec piecewise(std::vector<double> breaks, std::vector<double> rates);
  static HazardSpec weibull(double shape, double scale);
  static HazardSpec entry_shifted(const HazardSpec& inner, ClockMode mode);

  bool needs_entry() const noexcept { return clock_.has_value(); }
  std::optional<ClockMode> clock_mode() const noexcept { return clock_; }
  const BaseHazard& base() const noexcept { return base_; }
  /// The spec without its entry shift.
  HazardSpec inner() const { return HazardSpec(base_, std::nullopt); }

  /// Constant-rate value, if this is a plain (unshifted) constant hazard.
  std::optional<double> constant_rate() const noexcept;

  bool operator==(const HazardSpec& other) const;

 private:
  HazardSpec(BaseHazard base, std::optional<ClockMode> clock)
      : base_(std::move(base)), clock_(clock) {}

  BaseHazard base_;
  std::optional<ClockMode> clock_;
};

/// lambda(t). Entry time must be supplied exactly when spec.needs_entry().
double hazard_at(const HazardSpec& spec, double t, std::optional<double> entry = std::nullopt);

/// Lambda(a, b) = integral of lambda over [a, b], in closed form.
double cumulative_hazard(const HazardSpec& spec, double a, double b,
                         std::optional<double> entry = std::nullopt);

/// Smallest t >= a with Lambda(a, t) == target; +inf when the remaining mass
/// Lambda(a, inf) is below target.
double invert_cumulative_hazard(const HazardSpec& spec, double a, double target,
                                std::optional<double> entry = std::nullopt);

}  // namespace trialmsm
