#include "trialmsm/design.hpp"

#include "trialmsm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <thread>

namespace trialmsm {

namespace {

struct Outcome {
  bool pfs_reject = false;
  bool os_interim_reject = false;
  bool os_final_reject = false;
  bool pfs_shortfall = false;
  bool os_shortfall = false;
  bool undefined = false;
  std::uint32_t pfs_events = 0;
  std::uint32_t os_interim_events = 0;
  std::uint32_t os_final_events = 0;
};

class ReplicationRunner {
 public:
  ReplicationRunner(const Scenario& scenario, const TrialDesign& design, EvalScope scope)
      : scenario_(scenario),
        design_(design),
        scope_(scope),
        treatment_(static_cast<std::uint32_t>(scenario.experimental())),
        control_(static_cast<std::uint32_t>(scenario.control)) {}

  Outcome run(std::uint64_t seed, std::uint32_t rep) {
    simulate_trial_into(scenario_, design_.n_patients, seed, rep, records_);
    Outcome out;
    const bool need_pfs_cut = scope_ != EvalScope::os_only || design_.os_interim_critical;
    DataCut pfs_cut;
    if (need_pfs_cut) {
      pfs_cut = find_cut(records_, Endpoint::pfs, design_.pfs_events);
      out.pfs_shortfall = pfs_cut.shortfall;
    }
    if (scope_ != EvalScope::os_only && !pfs_cut.shortfall) {
      out.pfs_events = static_cast<std::uint32_t>(design_.pfs_events);
      out.pfs_reject = rejects(Endpoint::pfs, pfs_cut, design_.pfs_critical, out);
    }
    if (scope_ == EvalScope::pfs_only) return out;
    if (design_.os_interim_critical && !pfs_cut.shortfall) {
      std::size_t events = 0;
      out.os_interim_reject =
          rejects(Endpoint::os, pfs_cut, *design_.os_interim_critical, out, &events);
      out.os_interim_events = static_cast<std::uint32_t>(events);
    }
    const DataCut os_cut = find_cut(records_, Endpoint::os, design_.os_events);
    out.os_shortfall = os_cut.shortfall;
    if (!os_cut.shortfall) {
      out.os_final_events = static_cast<std::uint32_t>(design_.os_events);
      out.os_final_reject = rejects(Endpoint::os, os_cut, design_.os_critical, out);
    }
    return out;
  }

 private:
  // Two-sided log-rank test at the cut; an undefined statistic never rejects.
  bool rejects(Endpoint endpoint, const DataCut& cut, double critical, Outcome& out,
               std::size_t* event_count = nullptr) {
    obs_.clear();
    std::size_t events = 0;
    std::size_t all_events = 0;
    for (const auto& r : records_) {
      if (!(r.entry < cut.time)) continue;
      const auto [t, event] = observed_at(r, endpoint, cut);
      all_events += event;
      if (r.arm != treatment_ && r.arm != control_) continue;
      events += event;
      obs_.push_back({t, event, static_cast<std::uint8_t>(r.arm == treatment_ ? 0 : 1)});
    }
    if (event_count) *event_count = all_events;
    if (events == 0) {
      out.undefined = true;
      return false;
    }
    const auto z = logrank_z(obs_);
    if (!z) {
      out.undefined = true;
      return false;
    }
    return std::abs(*z) >= critical;
  }

  const Scenario& scenario_;
  const TrialDesign& design_;
  EvalScope scope_;
  std::uint32_t treatment_;
  std::uint32_t control_;
  std::vector<ObservedRecord> records_;
  std::vector<LogrankObs> obs_;
};

std::vector<Outcome> run_replications(const Scenario& scenario, const TrialDesign& design,
                                      const McOptions& mc, EvalScope scope) {
  if (mc.n_rep == 0) throw std::invalid_argument("n-rep must be >= 1");
  std::vector<Outcome> outcomes(mc.n_rep);
  const unsigned threads =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(mc.threads, mc.n_rep)));
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned k) {
    try {
      ReplicationRunner runner(scenario, design, scope);
      for (std::size_t rep = k; rep < mc.n_rep; rep += threads) {
        outcomes[rep] = runner.run(mc.seed, static_cast<std::uint32_t>(rep));
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker, k);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outcomes;
}

SimSummary summarize(const std::vector<Outcome>& outcomes, const McOptions& mc) {
  SimSummary s;
  s.n_rep = outcomes.size();
  s.seed = mc.seed;
  std::vector<std::size_t> pfs_ev, ia_ev, fa_ev;
  for (const auto& o : outcomes) {
    const bool os_any = o.os_interim_reject || o.os_final_reject;
    s.pfs.count += o.pfs_reject;
    s.os_interim.count += o.os_interim_reject;
    s.os_final.count += !o.os_interim_reject && o.os_final_reject;
    s.os.count += os_any;
    s.global.count += o.pfs_reject || os_any;
    s.joint.count += o.pfs_reject && os_any;
    s.pfs_shortfall += o.pfs_shortfall;
    s.os_shortfall += o.os_shortfall;
    s.undefined_statistic += o.undefined;
    pfs_ev.push_back(o.pfs_events);
    ia_ev.push_back(o.os_interim_events);
    fa_ev.push_back(o.os_final_events);
  }
  for (Proportion* p : {&s.pfs, &s.os_interim, &s.os_final, &s.os, &s.global, &s.joint}) {
    p->n = s.n_rep;
  }
  s.pfs_events = CountSummary::of(std::move(pfs_ev));
  s.os_interim_events = CountSummary::of(std::move(ia_ev));
  s.os_final_events = CountSummary::of(std::move(fa_ev));
  return s;
}

const Proportion& power_of(const SimSummary& s, Endpoint e) {
  return e == Endpoint::pfs ? s.pfs : s.os;
}

double allocation_ratio(const Scenario& sc) {
  return sc.arms[sc.experimental()].allocation / sc.arms[sc.control].allocation;
}

double critical_for(double alpha_two_sided) { return normal_quantile(1.0 - alpha_two_sided / 2.0); }

// Allocation-pooled event density of `endpoint` at time t after entry, times
// the probability of being uncensored at t.
double observed_event_density(const Scenario& sc, Endpoint endpoint, double t) {
  double total_w = 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < sc.arms.size(); ++a) {
    const ArmHazards& arm = sc.hazards_for(a);
    const double w = sc.arms[a].allocation;
    const double f = endpoint == Endpoint::pfs
                         ? p00(arm, t) * (hazard_at(arm.h01, t) + hazard_at(arm.h02, t))
                         : os_density(arm, t);
    sum += w * f;
    total_w += w;
  }
  return sum / total_w * std::exp(-cumulative_hazard(sc.censoring, 0.0, t));
}

std::pair<double, double> planning_hrs(const Scenario& sc, const WorkflowInputs& in) {
  const ArmHazards& a = sc.arms[sc.experimental()].hazards;
  const ArmHazards& b = sc.arms[sc.control].hazards;
  const double pfs = in.hr_pfs ? *in.hr_pfs : hr_pfs(a, b);
  const double os = in.hr_os ? *in.hr_os : average_hr_os(a, b, in.ahr_horizon);
  return {pfs, os};
}

// Largest event target a trial of n patients reaches with near certainty.
std::size_t reachable_events(const Scenario& sc, Endpoint endpoint, std::size_t n_patients) {
  const double f = std::min(1.0, event_fraction(sc, endpoint, kInf));
  const double n = static_cast<double>(n_patients);
  const double cap = n * f - 4.0 * std::sqrt(n * f * (1.0 - f));
  return static_cast<std::size_t>(std::max(1.0, std::floor(cap)));
}

}  // namespace

double Proportion::se() const {
  if (n == 0) return 0.0;
  const double p = value();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

CountSummary CountSummary::of(std::vector<std::size_t> counts) {
  CountSummary s;
  s.n = counts.size();
  if (counts.empty()) return s;
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  s.mean = sum / n;
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - s.mean) * (static_cast<double>(c) - s.mean);
  s.sd = counts.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  auto quantile = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * n));
    return counts[std::min(counts.size() - 1, k == 0 ? 0 : k - 1)];
  };
  s.min = counts.front();
  s.q05 = quantile(0.05);
  s.median = quantile(0.5);
  s.q95 = quantile(0.95);
  s.max = counts.back();
  return s;
}

void TrialDesign::validate() const {
  if (n_patients < 2) throw std::invalid_argument("design: n_patients must be >= 2");
  if (pfs_events == 0 || os_events == 0) throw std::invalid_argument("design: event targets must be >= 1");
  if (pfs_events > n_patients || os_events > n_patients) {
    throw std::invalid_argument("design: event targets cannot exceed n_patients");
  }
  schedule().validate();
}

GsDesign TrialDesign::schedule() const {
  GsDesign g;
  g.global_alpha = alpha_pfs + alpha_os;
  g.endpoints.push_back({"PFS", alpha_pfs, {{pfs_events, pfs_critical}}});
  EndpointSchedule os{"OS", alpha_os, {}};
  if (os_interim_critical) os.analyses.push_back({0, *os_interim_critical});
  os.analyses.push_back({os_events, os_critical});
  g.endpoints.push_back(os);
  return g;
}

SimSummary simulate_design(const Scenario& scenario, const TrialDesign& design, const McOptions& mc,
                           EvalScope scope) {
  scenario.validate();
  design.validate();
  return summarize(run_replications(scenario, design, mc, scope), mc);
}

SimSummary estimate_alpha(const Scenario& scenario, const TrialDesign& design, const McOptions& mc) {
  return simulate_design(scenario.as_null(), design, mc);
}

SimSummary estimate_power(const Scenario& scenario, const TrialDesign& design, const McOptions& mc) {
  return simulate_design(scenario, design, mc);
}

CalibrationResult calibrate_events(const Scenario& scenario, const TrialDesign& design,
                                   Endpoint endpoint, double target_power, double tolerance,
                                   const McOptions& mc, std::size_t seed_events,
                                   std::size_t max_events) {
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw std::domain_error("calibrate_events: target power must lie in (0, 1)");
  }
  max_events = std::min(max_events, design.n_patients);
  seed_events = std::clamp<std::size_t>(seed_events, 1, max_events);
  const double goal = target_power - tolerance;
  const EvalScope scope = endpoint == Endpoint::pfs ? EvalScope::pfs_only : EvalScope::os_only;
  CalibrationResult result;
  std::map<std::size_t, Proportion> cache;
  auto power = [&](std::size_t events) {
    if (auto it = cache.find(events); it != cache.end()) return it->second;
    TrialDesign d = design;
    (endpoint == Endpoint::pfs ? d.pfs_events : d.os_events) = events;
    const Proportion p = power_of(simulate_design(scenario, d, mc, scope), endpoint);
    cache.emplace(events, p);
    result.trace.push_back({events, p});
    return p;
  };
  auto meets = [&](std::size_t events) { return power(events).value() >= goal; };

  std::size_t lo = 0, hi = 0;  // power(lo) < goal <= power(hi); lo == 0 means "below 1"
  if (meets(seed_events)) {
    hi = seed_events;
    while (true) {
      if (hi == 1) break;
      const std::size_t next = std::max<std::size_t>(1, hi / 2);
      if (meets(next)) {
        hi = next;
      } else {
        lo = next;
        break;
      }
    }
  } else {
    lo = seed_events;
    while (true) {
      if (lo >= max_events) {
        throw BracketNotFound("calibrate_events: power target not reached within " +
                              std::to_string(max_events) + " events");
      }
      const std::size_t next = std::min(max_events, lo * 2);
      if (meets(next)) {
        hi = next;
        break;
      }
      lo = next;
    }
  }
  while (lo != 0 && hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (meets(mid) ? hi : lo) = mid;
  }
  result.events = hi;
  result.power = power(hi);

  std::vector<CalibrationPoint> sorted = result.trace;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.events < b.events; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double drop = sorted[i - 1].power.value() - sorted[i].power.value();
    if (drop <= 0.0) continue;
    const double se = std::max(sorted[i - 1].power.se(), sorted[i].power.se());
    ++(drop <= 2.0 * se ? result.monotone_noise : result.monotone_violations);
  }
  return result;
}

double event_fraction(const Scenario& sc, Endpoint endpoint, double horizon) {
  if (!(horizon > 0.0)) throw std::domain_error("event_fraction: horizon must be > 0");
  return integrate([&](double t) { return observed_event_density(sc, endpoint, t); }, 0.0, horizon,
                   1e-9, 1e-13)
      .value;
}

double expected_events(const Scenario& sc, Endpoint endpoint, std::size_t n_patients,
                       double calendar) {
  if (!(calendar > 0.0)) return 0.0;
  const double n = static_cast<double>(n_patients);
  auto density = [&](double t) { return observed_event_density(sc, endpoint, t); };
  if (sc.accrual.kind == Accrual::Kind::instantaneous) {
    return n * integrate(density, 0.0, calendar, 1e-9, 1e-13).value;
  }
  const double d = sc.accrual.duration;
  // Fraction enrolled by calendar - t is min(1, (calendar - t) / d).
  const double split = std::max(0.0, calendar - d);
  double total = 0.0;
  if (split > 0.0) total += integrate(density, 0.0, split, 1e-9, 1e-13).value;
  total += integrate([&](double t) { return density(t) * (calendar - t) / d; }, split, calendar,
                     1e-9, 1e-13)
               .value;
  return n * total;
}

double expected_calendar_time(const Scenario& sc, Endpoint endpoint, std::size_t n_patients,
                              double events) {
  auto excess = [&](double c) { return expected_events(sc, endpoint, n_patients, c) - events; };
  double hi = 1.0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e5) return kInf;
  }
  return find_root(excess, 0.0, hi, 1e-9);
}

std::size_t default_enrolment(const Scenario& sc,
                              const std::vector<std::pair<Endpoint, std::size_t>>& targets,
                              double factor, double horizon) {
  double needed = 0.0;
  for (const auto& [endpoint, events] : targets) {
    const double f = event_fraction(sc, endpoint, horizon);
    if (!(f > 0.0)) throw std::domain_error("default_enrolment: no events expected by the horizon");
    needed = std::max(needed, static_cast<double>(events) / f);
  }
  return static_cast<std::size_t>(std::ceil(factor * needed));
}

void WorkflowInputs::validate() const {
  if (std::abs(alpha_pfs + alpha_os - global_alpha) > 1e-12) {
    throw std::invalid_argument("alpha split must sum to the global alpha");
  }
  if (!(alpha_pfs > 0.0) || !(alpha_os > 0.0)) throw std::invalid_argument("endpoint alphas must be > 0");
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw std::invalid_argument("target power must lie in (0, 1)");
  }
  if (!(tolerance >= 0.0)) throw std::invalid_argument("calibration tolerance must be >= 0");
  if (!(enrolment_factor > 0.0)) throw std::invalid_argument("enrolment factor must be > 0");
  if (interim_fraction && !(*interim_fraction > 0.0 && *interim_fraction <= 1.0)) {
    throw std::invalid_argument("interim fraction must lie in (0, 1]");
  }
}

TrialDesign plan_coprimary(const Scenario& scenario, const WorkflowInputs& inputs) {
  const auto [hr_pfs, hr_os] = planning_hrs(scenario, inputs);
  const double r = allocation_ratio(scenario);
  TrialDesign d;
  d.alpha_pfs = inputs.alpha_pfs;
  d.alpha_os = inputs.alpha_os;
  d.pfs_events = schoenfeld_events(hr_pfs, inputs.alpha_pfs, inputs.target_power, r);
  d.os_events = schoenfeld_events(hr_os, inputs.alpha_os, inputs.target_power, r);
  d.pfs_critical = critical_for(inputs.alpha_pfs);
  d.os_critical = critical_for(inputs.alpha_os);
  d.n_patients = inputs.n_patients
                     ? *inputs.n_patients
                     : default_enrolment(scenario, {{Endpoint::pfs, d.pfs_events}, {Endpoint::os, d.os_events}},
                                         inputs.enrolment_factor, inputs.fraction_horizon);
  return d;
}

CoprimaryReport run_coprimary_workflow(const Scenario& scenario, const WorkflowInputs& inputs,
                                       const McOptions& mc) {
  scenario.validate();
  inputs.validate();
  CoprimaryReport rep;
  rep.scenario = scenario;
  rep.inputs = inputs;
  std::tie(rep.hr_pfs, rep.hr_os) = planning_hrs(scenario, inputs);
  const double power = inputs.target_power;

  rep.planned = plan_coprimary(scenario, inputs);
  const TrialDesign& d = rep.planned;

  rep.null_at_planned = estimate_alpha(scenario, d, mc);
  rep.power_at_planned = estimate_power(scenario, d, mc);
  rep.pfs_calibration = calibrate_events(scenario, d, Endpoint::pfs, power, inputs.tolerance, mc,
                                         d.pfs_events,
                                         reachable_events(scenario, Endpoint::pfs, d.n_patients));
  rep.os_calibration = calibrate_events(scenario, d, Endpoint::os, power, inputs.tolerance, mc,
                                        d.os_events,
                                        reachable_events(scenario, Endpoint::os, d.n_patients));
  rep.calibrated = d;
  rep.calibrated.pfs_events = rep.pfs_calibration.events;
  rep.calibrated.os_events = rep.os_calibration.events;
  rep.power_at_calibrated = estimate_power(scenario, rep.calibrated, mc);
  return rep;
}

GroupSequentialReport run_group_sequential_workflow(const Scenario& scenario,
                                                    const WorkflowInputs& inputs,
                                                    const McOptions& mc) {
  scenario.validate();
  inputs.validate();
  GroupSequentialReport rep;
  rep.scenario = scenario;
  rep.inputs = inputs;
  std::tie(rep.hr_pfs, rep.hr_os) = planning_hrs(scenario, inputs);
  const double r = allocation_ratio(scenario);
  const double power = inputs.target_power;
  const double os_exact = schoenfeld_events_exact(rep.hr_os, inputs.alpha_os, power, r);
  rep.os_fixed_events = static_cast<std::size_t>(std::ceil(os_exact));

  TrialDesign& d = rep.planned;
  d.alpha_pfs = inputs.alpha_pfs;
  d.alpha_os = inputs.alpha_os;
  d.pfs_events = schoenfeld_events(rep.hr_pfs, inputs.alpha_pfs, power, r);
  d.pfs_critical = critical_for(inputs.alpha_pfs);

  auto plan = [&](double t1) {
    rep.planned_fraction = t1;
    rep.boundaries = gs_boundaries(inputs.alpha_os, t1);
    rep.inflation = gs_inflation(rep.boundaries, inputs.alpha_os, power);
    d.os_events = static_cast<std::size_t>(std::ceil(os_exact * rep.inflation));
    d.n_patients = inputs.n_patients
                       ? *inputs.n_patients
                       : default_enrolment(scenario, {{Endpoint::pfs, d.pfs_events}, {Endpoint::os, d.os_events}},
                                           inputs.enrolment_factor, inputs.fraction_horizon);
  };
  // Planned interim fraction: expected OS events at the expected calendar
  // time of the PFS final analysis, over the final OS target.
  auto implied_fraction = [&]() {
    const double when = expected_calendar_time(scenario, Endpoint::pfs, d.n_patients,
                                               static_cast<double>(d.pfs_events));
    if (std::isinf(when)) return 1.0;
    const double ia = expected_events(scenario, Endpoint::os, d.n_patients, when);
    return std::min(1.0, ia / static_cast<double>(d.os_events));
  };
  if (inputs.interim_fraction) {
    plan(*inputs.interim_fraction);
  } else {
    double t1 = 0.5;
    for (int iter = 0; iter < 50; ++iter) {
      plan(t1);
      const double next = implied_fraction();
      if (std::abs(next - t1) < 1e-9) break;
      t1 = next;
    }
    plan(t1);
  }
  rep.planned_interim_events =
      static_cast<std::size_t>(std::llround(rep.planned_fraction * static_cast<double>(d.os_events)));
  d.os_critical = rep.boundaries.c2;
  if (rep.planned_fraction < 1.0) {
    d.os_interim_critical = rep.boundaries.c1;
  } else {
    d.os_interim_critical.reset();
  }

  rep.null_at_planned = estimate_alpha(scenario, d, mc);
  rep.power_at_planned = estimate_power(scenario, d, mc);
  rep.os_calibration = calibrate_events(scenario, d, Endpoint::os, power, inputs.tolerance, mc,
                                        d.os_events,
                                        reachable_events(scenario, Endpoint::os, d.n_patients));
  rep.calibrated = d;
  rep.calibrated.os_events = rep.os_calibration.events;
  rep.null_at_calibrated = estimate_alpha(scenario, rep.calibrated, mc);
  rep.power_at_calibrated = estimate_power(scenario, rep.calibrated, mc);
  return rep;
}

}  // namespace trialmsm
