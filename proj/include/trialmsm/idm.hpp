#pragma once

#include "trialmsm/hazard.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace trialmsm {

/// The three transition hazards of the illness-death model
/// (0 = initial, 1 = progression, 2 = death). Only h12 may be entry-shifted.
struct ArmHazards {
  HazardSpec h01;
  HazardSpec h02;
  HazardSpec h12;

  ArmHazards(HazardSpec h01_, HazardSpec h02_, HazardSpec h12_);

  static ArmHazards constant(double l01, double l02, double l12) {
    return {HazardSpec::constant(l01), HazardSpec::constant(l02), HazardSpec::constant(l12)};
  }

  /// True when every transition is a plain constant hazard.
  bool is_constant() const noexcept;
  /// True unless h12 is clock-reset.
  bool is_markov() const noexcept;

  bool operator==(const ArmHazards&) const = default;
};

/// Raised when a closed form needs lambda12 != lambda01 + lambda02 (or another
/// nondegenerate combination) and the parameters violate it.
class DegenerateParameters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Constant-hazard closed forms, templated on the scalar type.

template <typename Scalar>
struct ConstantRates {
  Scalar l01;
  Scalar l02;
  Scalar l12;

  /// lambda12 - lambda01 - lambda02.
  Scalar l012() const { return l12 - l01 - l02; }
};

template <typename Scalar>
Scalar p00_closed(const ConstantRates<Scalar>& r, Scalar t) {
  using std::exp;
  return exp(-(r.l01 + r.l02) * t);
}

template <typename Scalar>
Scalar p01_closed(const ConstantRates<Scalar>& r, Scalar t) {
  using std::exp;
  const Scalar l012 = r.l012();
  if (l012 == Scalar(0)) throw DegenerateParameters("p01: lambda12 - lambda01 - lambda02 is zero");
  return r.l01 / l012 * (exp(-(r.l01 + r.l02) * t) - exp(-r.l12 * t));
}

/// OS hazard under constant transition hazards.
template <typename Scalar>
Scalar h_os_closed(const ConstantRates<Scalar>& r, Scalar t) {
  using std::exp;
  const Scalar l012 = r.l012();
  if (l012 == Scalar(0)) throw DegenerateParameters("h_os: lambda12 - lambda01 - lambda02 is zero");
  const Scalar decay = exp(-l012 * t);
  const Scalar num = (r.l12 - r.l02) * (r.l01 + r.l02) - r.l01 * r.l12 * decay;
  // The denominator equals l012 at t = 0 and moves monotonically away from
  // zero, so it never vanishes once l012 != 0.
  const Scalar den = (r.l12 - r.l02) - r.l01 * decay;
  return num / den;
}

/// Constant rates of an arm; throws std::invalid_argument if any hazard is not constant.
ConstantRates<double> constant_rates(const ArmHazards& arm);

// ---------------------------------------------------------------------------
// General arms (closed form when constant, quadrature otherwise).

/// P(X_t = 0 | X_0 = 0) = S_PFS(t).
double p00(const ArmHazards& arm, double t);

/// P(X_t = 1 | X_0 = 0).
double p01(const ArmHazards& arm, double t);

double s_pfs(const ArmHazards& arm, double t);
double s_os(const ArmHazards& arm, double t);

/// P(PFS <= u, OS <= v) for u <= v.
double joint_cdf(const ArmHazards& arm, double u, double v);

/// Markov transition-probability matrix P(s, t), rows/cols = states 0, 1, 2.
Eigen::Matrix3d transition_matrix(const ArmHazards& arm, double s, double t);

/// OS hazard; constant arms only (rational closed form).
double h_os(const ArmHazards& arm, double t);

/// OS hazard for any arm: OS density over S_OS, by quadrature.
double os_hazard_general(const ArmHazards& arm, double t);

/// OS density f_OS(t) = -S_OS'(t) for any arm.
double os_density(const ArmHazards& arm, double t);

/// PFS hazard ratio arm_a / arm_b; constant arms only.
double hr_pfs(const ArmHazards& arm_a, const ArmHazards& arm_b);

/// OS hazard ratio at t; nullopt when the denominator hazard is zero.
std::optional<double> hr_os(const ArmHazards& arm_a, const ArmHazards& arm_b, double t);

/// Time-averaged OS hazard ratio over [0, horizon] with weight
/// w(t) = -d/dt sqrt(S_OS,A(t) S_OS,B(t)), i.e.
/// AHR = int h_A sqrt(S_A S_B) dt / int h_B sqrt(S_A S_B) dt.
double average_hr_os(const ArmHazards& arm_a, const ArmHazards& arm_b, double horizon);

/// Curve carrier: strictly increasing times with one value per time.
struct CurveGrid {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
};

/// Evaluates f on an equally spaced grid [0, horizon] with `points` nodes.
template <typename F>
CurveGrid tabulate(F&& f, double horizon, Eigen::Index points) {
  CurveGrid grid{Eigen::VectorXd::LinSpaced(points, 0.0, horizon), Eigen::VectorXd(points)};
  for (Eigen::Index i = 0; i < points; ++i) grid.values[i] = f(grid.times[i]);
  return grid;
}

}  // namespace trialmsm
