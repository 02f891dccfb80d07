#include "trialmsm/idm.hpp"

#include "trialmsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trialmsm {

namespace {

constexpr double kQuadRelTol = 1e-8;

void require_time(double t, const char* what) {
  if (!(t >= 0.0)) throw std::domain_error(std::string(what) + ": time must be >= 0");
}

// exp(-Lambda12(u, t)) for a subject entering state 1 at u.
double stay_in_progression(const ArmHazards& arm, double u, double t) {
  const std::optional<double> entry = arm.h12.needs_entry() ? std::optional(u) : std::nullopt;
  return std::exp(-cumulative_hazard(arm.h12, u, t, entry));
}

double h12_at(const ArmHazards& arm, double t, double entry) {
  return arm.h12.needs_entry() ? hazard_at(arm.h12, t, entry) : hazard_at(arm.h12, t);
}

// P(X_s = 0 -> X_t = 0) for s <= t.
double stay_initial(const ArmHazards& arm, double s, double t) {
  return std::exp(-cumulative_hazard(arm.h01, s, t) - cumulative_hazard(arm.h02, s, t));
}

// P(X_t = 1 | X_s = 0), by quadrature over the progression time.
double p01_general(const ArmHazards& arm, double s, double t) {
  if (t <= s) return 0.0;
  auto integrand = [&](double u) {
    return stay_initial(arm, s, u) * hazard_at(arm.h01, u) * stay_in_progression(arm, u, t);
  };
  return integrate(integrand, s, t, kQuadRelTol, 1e-15).value;
}

}  // namespace

ArmHazards::ArmHazards(HazardSpec h01_, HazardSpec h02_, HazardSpec h12_)
    : h01(std::move(h01_)), h02(std::move(h02_)), h12(std::move(h12_)) {
  if (h01.needs_entry() || h02.needs_entry()) {
    throw InvalidHazard("entry-shifted hazards are only legal for the 1->2 transition");
  }
}

bool ArmHazards::is_constant() const noexcept {
  return h01.constant_rate() && h02.constant_rate() && h12.constant_rate();
}

bool ArmHazards::is_markov() const noexcept {
  return h12.clock_mode() != ClockMode::clock_reset;
}

ConstantRates<double> constant_rates(const ArmHazards& arm) {
  if (!arm.is_constant()) throw std::invalid_argument("closed form requires constant hazards");
  return {*arm.h01.constant_rate(), *arm.h02.constant_rate(), *arm.h12.constant_rate()};
}

double p00(const ArmHazards& arm, double t) {
  require_time(t, "p00");
  return stay_initial(arm, 0.0, t);
}

double p01(const ArmHazards& arm, double t) {
  require_time(t, "p01");
  if (arm.is_constant()) return p01_closed(constant_rates(arm), t);
  return p01_general(arm, 0.0, t);
}

double s_pfs(const ArmHazards& arm, double t) { return p00(arm, t); }

double s_os(const ArmHazards& arm, double t) { return p00(arm, t) + p01(arm, t); }

Eigen::Matrix3d transition_matrix(const ArmHazards& arm, double s, double t) {
  if (!arm.is_markov()) throw std::invalid_argument("transition_matrix: arm is not Markov");
  require_time(s, "transition_matrix");
  if (s > t) throw std::domain_error("transition_matrix: s must not exceed t");
  Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
  p(0, 0) = stay_initial(arm, s, t);
  if (arm.is_constant() && s == 0.0) {
    p(0, 1) = p01_closed(constant_rates(arm), t);
  } else {
    p(0, 1) = p01_general(arm, s, t);
  }
  p(0, 2) = 1.0 - p(0, 0) - p(0, 1);
  p(1, 1) = stay_in_progression(arm, s, t);
  p(1, 2) = 1.0 - p(1, 1);
  p(2, 2) = 1.0;
  return p;
}

double joint_cdf(const ArmHazards& arm, double u, double v) {
  require_time(u, "joint_cdf");
  if (u > v) throw std::domain_error("joint_cdf: u must not exceed v");
  const double dead_by_u = 1.0 - s_os(arm, u);
  if (std::isinf(v)) return 1.0 - s_pfs(arm, u);
  if (arm.is_markov()) {
    // P(X_v = 2 | X_u = 1) P(X_u = 1) + P(X_u = 2)
    return (1.0 - stay_in_progression(arm, u, v)) * p01(arm, u) + dead_by_u;
  }
  // Progression at x <= u, still alive at u, dead by v.
  auto integrand = [&](double x) {
    return stay_initial(arm, 0.0, x) * hazard_at(arm.h01, x) *
           (stay_in_progression(arm, x, u) - stay_in_progression(arm, x, v));
  };
  return dead_by_u + integrate(integrand, 0.0, u, kQuadRelTol, 1e-15).value;
}

double h_os(const ArmHazards& arm, double t) {
  require_time(t, "h_os");
  return h_os_closed(constant_rates(arm), t);
}

double os_density(const ArmHazards& arm, double t) {
  require_time(t, "os_density");
  if (arm.is_constant()) {
    const auto r = constant_rates(arm);
    return r.l02 * p00_closed(r, t) + r.l12 * p01_closed(r, t);
  }
  const double direct = p00(arm, t) * hazard_at(arm.h02, t);
  if (t == 0.0) return direct;
  auto integrand = [&](double u) {
    return stay_initial(arm, 0.0, u) * hazard_at(arm.h01, u) * stay_in_progression(arm, u, t) *
           h12_at(arm, t, u);
  };
  return direct + integrate(integrand, 0.0, t, kQuadRelTol, 1e-15).value;
}

double os_hazard_general(const ArmHazards& arm, double t) {
  return os_density(arm, t) / s_os(arm, t);
}

double hr_pfs(const ArmHazards& arm_a, const ArmHazards& arm_b) {
  const auto a = constant_rates(arm_a);
  const auto b = constant_rates(arm_b);
  const double den = b.l01 + b.l02;
  if (den <= 0.0) throw DegenerateParameters("hr_pfs: reference PFS hazard is zero");
  return (a.l01 + a.l02) / den;
}

std::optional<double> hr_os(const ArmHazards& arm_a, const ArmHazards& arm_b, double t) {
  const double den = h_os(arm_b, t);
  if (den == 0.0) return std::nullopt;
  return h_os(arm_a, t) / den;
}

double average_hr_os(const ArmHazards& arm_a, const ArmHazards& arm_b, double horizon) {
  if (!(horizon > 0.0)) throw std::domain_error("average_hr_os: horizon must be > 0");
  const auto a = constant_rates(arm_a);
  const auto b = constant_rates(arm_b);
  auto weight = [&](double t) {
    return std::sqrt((p00_closed(a, t) + p01_closed(a, t)) * (p00_closed(b, t) + p01_closed(b, t)));
  };
  const double num =
      integrate([&](double t) { return h_os_closed(a, t) * weight(t); }, 0.0, horizon, 1e-8, 0.0)
          .value;
  const double den =
      integrate([&](double t) { return h_os_closed(b, t) * weight(t); }, 0.0, horizon, 1e-8, 0.0)
          .value;
  if (den == 0.0) throw DegenerateParameters("average_hr_os: reference arm has no OS events");
  return num / den;
}

}  // namespace trialmsm
