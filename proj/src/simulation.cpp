#include "trialmsm/simulation.hpp"

#include "trialmsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace trialmsm {

namespace {

HazardSpec as_piecewise(const HazardSpec& h) {
  if (const auto* c = std::get_if<ConstantHazard>(&h.base())) {
    return HazardSpec::piecewise({0.0}, {c->rate});
  }
  return h;
}

// Lambda01 + Lambda02 as a single closed-form hazard, when the pair allows it.
std::optional<HazardSpec> combined_exit_hazard(const HazardSpec& a, const HazardSpec& b) {
  if (a.constant_rate() && b.constant_rate()) {
    return HazardSpec::constant(*a.constant_rate() + *b.constant_rate());
  }
  const auto* wa = std::get_if<WeibullHazard>(&a.base());
  const auto* wb = std::get_if<WeibullHazard>(&b.base());
  if (wa && wb && wa->shape == wb->shape) {
    const double k = wa->shape;
    const double coef = std::pow(wa->scale, -k) + std::pow(wb->scale, -k);
    return HazardSpec::weibull(k, std::pow(coef, -1.0 / k));
  }
  if (wa || wb) return std::nullopt;
  const HazardSpec pa = as_piecewise(a);
  const HazardSpec pb = as_piecewise(b);
  const auto& xa = std::get<PiecewiseHazard>(pa.base());
  const auto& xb = std::get<PiecewiseHazard>(pb.base());
  std::vector<double> breaks;
  std::set_union(xa.breaks.begin(), xa.breaks.end(), xb.breaks.begin(), xb.breaks.end(),
                 std::back_inserter(breaks));
  std::vector<double> rates;
  rates.reserve(breaks.size());
  for (double t : breaks) rates.push_back(hazard_at(pa, t) + hazard_at(pb, t));
  return HazardSpec::piecewise(std::move(breaks), std::move(rates));
}

double invert_sum_numerically(const HazardSpec& a, const HazardSpec& b, double target) {
  auto excess = [&](double t) {
    return cumulative_hazard(a, 0.0, t) + cumulative_hazard(b, 0.0, t) - target;
  };
  double hi = 1.0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) return kInf;
  }
  return find_root(excess, 0.0, hi, 1e-13 * hi);
}

class ArmSampler {
 public:
  explicit ArmSampler(const ArmHazards& arm) : arm_(&arm), exit_(combined_exit_hazard(arm.h01, arm.h02)) {}

  PatientPath sample(const PatientStream& stream) const {
    PatientPath path;
    const double e0 = stream.exponential(draw::sojourn0);
    path.t0 = exit_ ? invert_cumulative_hazard(*exit_, 0.0, e0)
                    : invert_sum_numerically(arm_->h01, arm_->h02, e0);
    if (std::isinf(path.t0)) return path;
    const double l01 = hazard_at(arm_->h01, path.t0);
    const double l02 = hazard_at(arm_->h02, path.t0);
    const double total = l01 + l02;
    const bool progression = total > 0.0 && stream.uniform(draw::branch) < l01 / total;
    if (!progression) return path;
    path.first = FirstTransition::progression;
    const double e1 = stream.exponential(draw::sojourn1);
    const std::optional<double> entry =
        arm_->h12.needs_entry() ? std::optional(path.t0) : std::nullopt;
    path.t1 = invert_cumulative_hazard(arm_->h12, path.t0, e1, entry) - path.t0;
    return path;
  }

 private:
  const ArmHazards* arm_;
  std::optional<HazardSpec> exit_;
};

}  // namespace

Accrual Accrual::uniform(double duration) {
  if (!(duration > 0.0) || std::isinf(duration)) {
    throw std::invalid_argument("uniform accrual duration must be finite and > 0");
  }
  return {Kind::uniform, duration};
}

void Scenario::validate() const {
  if (arms.size() < 2) throw std::invalid_argument("scenario needs at least two arms");
  if (control >= arms.size()) throw std::invalid_argument("control arm index out of range");
  for (const auto& a : arms) {
    if (!(a.allocation > 0.0) || std::isinf(a.allocation)) {
      throw std::invalid_argument("arm '" + a.label + "': allocation must be finite and > 0");
    }
  }
  if (censoring.needs_entry()) throw std::invalid_argument("censoring hazard cannot be entry-shifted");
}

std::size_t Scenario::experimental() const { return control == 0 ? 1 : 0; }

PatientPath simulate_patient(const ArmHazards& arm, const PatientStream& stream) {
  return ArmSampler(arm).sample(stream);
}

ObservedRecord observe(const PatientPath& path, double censor_offset) {
  ObservedRecord r;
  r.entry = path.entry;
  const double death = path.first == FirstTransition::death ? path.t0 : path.t0 + *path.t1;
  r.pfs_event = path.t0 <= censor_offset && !std::isinf(path.t0);
  r.pfs_time = std::min(path.t0, censor_offset);
  r.os_event = death <= censor_offset && !std::isinf(death);
  r.os_time = std::min(death, censor_offset);
  r.progression_observed = r.pfs_event && path.first == FirstTransition::progression;
  return r;
}

void simulate_trial_into(const Scenario& scenario, std::size_t n_patients, std::uint64_t master_seed,
                         std::uint32_t replication, std::vector<ObservedRecord>& out) {
  scenario.validate();
  if (n_patients < 2) throw std::invalid_argument("simulate_trial: need at least 2 patients");
  std::vector<ArmSampler> samplers;
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t a = 0; a < scenario.arms.size(); ++a) {
    samplers.emplace_back(scenario.hazards_for(a));
    total += scenario.arms[a].allocation;
    cumulative.push_back(total);
  }
  out.resize(n_patients);
  for (std::size_t i = 0; i < n_patients; ++i) {
    const PatientStream stream(master_seed, replication, static_cast<std::uint32_t>(i));
    const double u_arm = stream.uniform(draw::arm) * total;
    std::size_t arm = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u_arm) - cumulative.begin());
    arm = std::min(arm, samplers.size() - 1);
    PatientPath path = samplers[arm].sample(stream);
    if (scenario.accrual.kind == Accrual::Kind::uniform) {
      path.entry = scenario.accrual.duration * stream.uniform(draw::entry);
    }
    path.censor_offset =
        invert_cumulative_hazard(scenario.censoring, 0.0, stream.exponential(draw::censor));
    ObservedRecord& r = out[i];
    r = observe(path, path.censor_offset);
    r.id = static_cast<std::uint32_t>(i);
    r.arm = static_cast<std::uint32_t>(arm);
  }
}

std::vector<ObservedRecord> simulate_trial(const Scenario& scenario, std::size_t n_patients,
                                           std::uint64_t master_seed, std::uint32_t replication) {
  std::vector<ObservedRecord> out;
  simulate_trial_into(scenario, n_patients, master_seed, replication, out);
  return out;
}

DataCut find_cut(std::span<const ObservedRecord> records, Endpoint endpoint,
                 std::size_t event_target) {
  if (event_target == 0) throw std::invalid_argument("event target must be >= 1");
  thread_local std::vector<std::pair<double, std::uint32_t>> keys;
  keys.clear();
  for (const auto& r : records) {
    if (has_event(r, endpoint)) keys.emplace_back(event_calendar(r, endpoint), r.id);
  }
  if (keys.size() < event_target) return {kInf, UINT32_MAX, true};
  const auto nth = keys.begin() + static_cast<std::ptrdiff_t>(event_target - 1);
  std::nth_element(keys.begin(), nth, keys.end());
  return {nth->first, nth->second, false};
}

std::size_t events_at(std::span<const ObservedRecord> records, Endpoint endpoint,
                      const DataCut& cut) {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (has_event(r, endpoint) && r.entry < cut.time &&
        cut.covers(event_calendar(r, endpoint), r.id)) {
      ++n;
    }
  }
  return n;
}

std::vector<ObservedRecord> apply_cut(std::span<const ObservedRecord> records, const DataCut& cut) {
  std::vector<ObservedRecord> snapshot;
  snapshot.reserve(records.size());
  for (const auto& r : records) {
    if (!(r.entry < cut.time)) continue;
    ObservedRecord s = r;
    std::tie(s.pfs_time, s.pfs_event) = observed_at(r, Endpoint::pfs, cut);
    std::tie(s.os_time, s.os_event) = observed_at(r, Endpoint::os, cut);
    s.progression_observed = r.progression_observed && s.pfs_event;
    snapshot.push_back(s);
  }
  return snapshot;
}

DataCutResult datacut(std::span<const ObservedRecord> records, Endpoint endpoint,
                      std::size_t event_target) {
  const DataCut cut = find_cut(records, endpoint, event_target);
  return {cut, apply_cut(records, cut)};
}

}  // namespace trialmsm
