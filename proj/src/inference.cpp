#include "trialmsm/inference.hpp"

#include "trialmsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trialmsm {

std::optional<double> logrank_z(std::span<LogrankObs> obs) {
  std::sort(obs.begin(), obs.end(),
            [](const LogrankObs& x, const LogrankObs& y) { return x.time < y.time; });
  double n = static_cast<double>(obs.size());
  double n_a = 0.0;
  bool any_event = false;
  for (const auto& o : obs) {
    if (o.group == 0) n_a += 1.0;
    any_event = any_event || o.event;
  }
  if (!any_event) throw std::invalid_argument("logrank_z: no events");
  double o_minus_e = 0.0;
  double var = 0.0;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].time;
    double d = 0.0, d_a = 0.0, leaving = 0.0, leaving_a = 0.0;
    for (; i < obs.size() && obs[i].time == t; ++i) {
      leaving += 1.0;
      if (obs[i].group == 0) leaving_a += 1.0;
      if (obs[i].event) {
        d += 1.0;
        if (obs[i].group == 0) d_a += 1.0;
      }
    }
    if (d > 0.0) {
      const double p = n_a / n;
      o_minus_e += d_a - d * p;
      if (n > 1.0) var += d * p * (1.0 - p) * (n - d) / (n - 1.0);
    }
    n -= leaving;
    n_a -= leaving_a;
  }
  if (!(var > 0.0)) return std::nullopt;
  return o_minus_e / std::sqrt(var);
}

std::optional<double> logrank_z(std::span<const double> times_a, std::span<const bool> events_a,
                                std::span<const double> times_b, std::span<const bool> events_b) {
  if (times_a.size() != events_a.size() || times_b.size() != events_b.size()) {
    throw std::invalid_argument("logrank_z: times and events differ in length");
  }
  std::vector<LogrankObs> obs;
  obs.reserve(times_a.size() + times_b.size());
  for (std::size_t i = 0; i < times_a.size(); ++i) obs.push_back({times_a[i], events_a[i], 0});
  for (std::size_t i = 0; i < times_b.size(); ++i) obs.push_back({times_b[i], events_b[i], 1});
  return logrank_z(obs);
}

double schoenfeld_events_exact(double hr, double alpha, double power, double ratio) {
  if (!(hr > 0.0) || hr == 1.0) throw std::domain_error("schoenfeld_events: hr must be > 0 and != 1");
  if (!(alpha > 0.0 && alpha < 1.0) || !(power > 0.0 && power < 1.0)) {
    throw std::domain_error("schoenfeld_events: alpha and power must lie in (0, 1)");
  }
  if (!(ratio > 0.0)) throw std::domain_error("schoenfeld_events: allocation ratio must be > 0");
  const double z = normal_quantile(1.0 - alpha / 2.0) + normal_quantile(power);
  const double log_hr = std::log(hr);
  return z * z * (1.0 + ratio) * (1.0 + ratio) / ratio / (log_hr * log_hr);
}

std::size_t schoenfeld_events(double hr, double alpha, double power, double ratio) {
  return static_cast<std::size_t>(std::ceil(schoenfeld_events_exact(hr, alpha, power, ratio)));
}

double obf_spending(double alpha_one_sided, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("obf_spending: t must lie in (0, 1]");
  if (!(alpha_one_sided > 0.0 && alpha_one_sided < 0.5)) {
    throw std::domain_error("obf_spending: one-sided alpha must lie in (0, 0.5)");
  }
  return 2.0 * normal_sf(normal_quantile(1.0 - alpha_one_sided / 2.0) / std::sqrt(t));
}

GsBoundaries gs_boundaries(double alpha_two_sided, double t1) {
  if (!(t1 > 0.0 && t1 <= 1.0)) throw std::domain_error("gs_boundaries: t1 must lie in (0, 1]");
  const double alpha1 = alpha_two_sided / 2.0;
  if (t1 == 1.0) {
    const double c = normal_quantile(1.0 - alpha1);
    return {1.0, c, c, alpha_two_sided};
  }
  const double spent = obf_spending(alpha1, t1);
  const double c1 = normal_quantile(1.0 - spent);
  const double rho = std::sqrt(t1);
  const double remaining = alpha1 - spent;
  auto excess = [&](double c2) { return normal_cdf(c1) - bvn_cdf(c1, c2, rho) - remaining; };
  const double c2 = find_root(excess, 0.0, 12.0, 1e-12);
  return {t1, c1, c2, 2.0 * spent};
}

double gs_drift(const GsBoundaries& b, double power) {
  if (!(power > 0.0 && power < 1.0)) throw std::domain_error("gs_drift: power must lie in (0, 1)");
  const double r = std::sqrt(b.t1);
  if (b.t1 >= 1.0) return b.c2 + normal_quantile(power);
  auto excess = [&](double theta) {
    return 1.0 - bvn_cdf(b.c1 - theta * r, b.c2 - theta, r) - power;
  };
  return find_root(excess, -5.0, 20.0, 1e-12);
}

double gs_inflation(const GsBoundaries& b, double alpha_two_sided, double power) {
  const double fixed = normal_quantile(1.0 - alpha_two_sided / 2.0) + normal_quantile(power);
  const double ratio = gs_drift(b, power) / fixed;
  return ratio * ratio;
}

void GsDesign::validate() const {
  double total = 0.0;
  for (const auto& e : endpoints) {
    if (!(e.alpha > 0.0)) throw std::invalid_argument("endpoint '" + e.name + "': alpha must be > 0");
    if (e.analyses.empty()) throw std::invalid_argument("endpoint '" + e.name + "': no analyses");
    for (std::size_t i = 1; i < e.analyses.size(); ++i) {
      const auto prev = e.analyses[i - 1].event_target;
      if (prev != 0 && e.analyses[i].event_target <= prev) {
        throw std::invalid_argument("endpoint '" + e.name + "': event targets must increase");
      }
    }
    total += e.alpha;
  }
  if (std::abs(total - global_alpha) > 1e-12) {
    throw std::invalid_argument("allotted alphas do not sum to the global alpha");
  }
}

}  // namespace trialmsm
