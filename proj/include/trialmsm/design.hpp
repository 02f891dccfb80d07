#pragma once

#include "trialmsm/inference.hpp"
#include "trialmsm/simulation.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace trialmsm {

/// Monte Carlo proportion; se() = sqrt(p (1 - p) / n).
struct Proportion {
  std::size_t count = 0;
  std::size_t n = 0;

  double value() const { return n == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(n); }
  double se() const;
};

/// Distribution of an observed event count over replications.
struct CountSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t min = 0;
  std::size_t q05 = 0;
  std::size_t median = 0;
  std::size_t q95 = 0;
  std::size_t max = 0;

  static CountSummary of(std::vector<std::size_t> counts);
};

/// Event-driven testing schedule of a PFS/OS trial.
///
/// PFS has one analysis. OS has a final event-driven analysis and optionally
/// an interim at the calendar time of the PFS final data cut.
struct TrialDesign {
  std::size_t n_patients = 0;
  double alpha_pfs = 0.01;
  double alpha_os = 0.04;
  std::size_t pfs_events = 0;
  double pfs_critical = 0.0;
  std::size_t os_events = 0;
  double os_critical = 0.0;
  std::optional<double> os_interim_critical;

  void validate() const;
  GsDesign schedule() const;
};

struct SimSummary {
  std::size_t n_rep = 0;
  std::uint64_t seed = 0;
  Proportion pfs;
  Proportion os_interim;
  Proportion os_final;  // rejected at the final analysis only
  Proportion os;        // interim or final
  Proportion global;    // any endpoint
  Proportion joint;     // both endpoints
  std::size_t pfs_shortfall = 0;
  std::size_t os_shortfall = 0;
  std::size_t undefined_statistic = 0;
  CountSummary pfs_events;
  CountSummary os_interim_events;
  CountSummary os_final_events;
};

struct McOptions {
  std::size_t n_rep = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Which parts of a replication to evaluate.
enum class EvalScope { all, pfs_only, os_only };

SimSummary simulate_design(const Scenario& scenario, const TrialDesign& design,
                           const McOptions& mc, EvalScope scope = EvalScope::all);

/// Type-I error under the null variant of `scenario`.
SimSummary estimate_alpha(const Scenario& scenario, const TrialDesign& design, const McOptions& mc);

/// Rejection rates under `scenario` as given.
SimSummary estimate_power(const Scenario& scenario, const TrialDesign& design, const McOptions& mc);

class BracketNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationPoint {
  std::size_t events = 0;
  Proportion power;
};

struct CalibrationResult {
  std::size_t events = 0;
  Proportion power;
  std::vector<CalibrationPoint> trace;  // evaluation order
  std::size_t monotone_violations = 0;  // decreases beyond 2 MC SE
  std::size_t monotone_noise = 0;       // decreases within 2 MC SE
};

/// Smallest event target of `endpoint` whose power is >= target - tolerance.
///
/// Integer bisection seeded at `seed_events` with bracket expansion by 2,
/// bounded by [1, max_events]; every candidate reuses the same replications.
CalibrationResult calibrate_events(const Scenario& scenario, const TrialDesign& design,
                                   Endpoint endpoint, double target_power, double tolerance,
                                   const McOptions& mc, std::size_t seed_events,
                                   std::size_t max_events);

// ---------------------------------------------------------------------------
// Planning

/// Probability that an enrolled patient of the scenario has an observed
/// `endpoint` event within `horizon` of entry (allocation-pooled, random
/// censoring included).
double event_fraction(const Scenario& scenario, Endpoint endpoint, double horizon);

/// Expected pooled `endpoint` events at calendar time `calendar` for
/// `n_patients` under the scenario's accrual.
double expected_events(const Scenario& scenario, Endpoint endpoint, std::size_t n_patients,
                       double calendar);

/// Calendar time at which expected events reach `events` (+inf if never).
double expected_calendar_time(const Scenario& scenario, Endpoint endpoint,
                              std::size_t n_patients, double events);

/// ceil(factor * max_e D_e / f_e(horizon)) over the given (endpoint, target) pairs.
std::size_t default_enrolment(const Scenario& scenario,
                              const std::vector<std::pair<Endpoint, std::size_t>>& targets,
                              double factor, double horizon);

struct WorkflowInputs {
  double global_alpha = 0.05;
  double alpha_pfs = 0.01;
  double alpha_os = 0.04;
  double target_power = 0.8;
  double tolerance = 0.0;
  std::optional<double> hr_pfs;  // default: analytic PFS hazard ratio
  std::optional<double> hr_os;   // default: average OS hazard ratio
  double ahr_horizon = 200.0;
  double enrolment_factor = 1.2;
  double fraction_horizon = 12.0;
  std::optional<std::size_t> n_patients;
  std::optional<double> interim_fraction;  // group-sequential only

  void validate() const;
};

struct CoprimaryReport {
  Scenario scenario;
  WorkflowInputs inputs;
  double hr_pfs = 0.0;
  double hr_os = 0.0;
  TrialDesign planned;  // Schoenfeld counts
  SimSummary null_at_planned;
  SimSummary power_at_planned;
  CalibrationResult pfs_calibration;
  CalibrationResult os_calibration;
  TrialDesign calibrated;
  SimSummary power_at_calibrated;
};

/// Schoenfeld event counts, critical values and enrolment of the co-primary design.
TrialDesign plan_coprimary(const Scenario& scenario, const WorkflowInputs& inputs);

CoprimaryReport run_coprimary_workflow(const Scenario& scenario, const WorkflowInputs& inputs,
                                       const McOptions& mc);

struct GroupSequentialReport {
  Scenario scenario;
  WorkflowInputs inputs;
  double hr_pfs = 0.0;
  double hr_os = 0.0;
  std::size_t os_fixed_events = 0;  // single-analysis Schoenfeld count
  double inflation = 1.0;
  double planned_fraction = 1.0;
  std::size_t planned_interim_events = 0;
  GsBoundaries boundaries;
  TrialDesign planned;
  SimSummary null_at_planned;
  SimSummary power_at_planned;
  CalibrationResult os_calibration;
  TrialDesign calibrated;
  SimSummary null_at_calibrated;
  SimSummary power_at_calibrated;
};

GroupSequentialReport run_group_sequential_workflow(const Scenario& scenario,
                                                    const WorkflowInputs& inputs,
                                                    const McOptions& mc);

}  // namespace trialmsm
