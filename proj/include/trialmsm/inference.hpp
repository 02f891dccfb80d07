#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trialmsm {

/// One right-censored observation tagged with its group (0 = A, 1 = B).
struct LogrankObs {
  double time;
  bool event;
  std::uint8_t group;
};

/// Standardized two-sample log-rank statistic (O_A - E_A) / sqrt(V).
///
/// Negative values favour group A. Reorders `obs`. Throws
/// std::invalid_argument when there is no event; nullopt when V == 0.
std::optional<double> logrank_z(std::span<LogrankObs> obs);

/// Convenience overload on separate samples.
std::optional<double> logrank_z(std::span<const double> times_a, std::span<const bool> events_a,
                                std::span<const double> times_b, std::span<const bool> events_b);

/// Schoenfeld's required number of events for a two-sided level-alpha
/// log-rank test with allocation ratio r.
std::size_t schoenfeld_events(double hr, double alpha, double power, double ratio = 1.0);

/// Unrounded Schoenfeld event count.
double schoenfeld_events_exact(double hr, double alpha, double power, double ratio = 1.0);

/// Lan-DeMets O'Brien-Fleming-type spending of one-sided alpha at information t.
double obf_spending(double alpha_one_sided, double t);

/// Critical values (on |Z|) of a two-look group-sequential test.
struct GsBoundaries {
  double t1 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double spent_interim = 0.0;  // two-sided alpha spent at the interim
};

/// OBF-spending boundaries for a two-sided level-alpha test with an interim
/// at information fraction t1. t1 == 1 gives a single analysis (c1 = c2).
GsBoundaries gs_boundaries(double alpha_two_sided, double t1);

/// Drift theta (E[Z] at full information) giving `power` for the two-look test.
double gs_drift(const GsBoundaries& b, double power);

/// Event-count inflation of the two-look test relative to a fixed design.
double gs_inflation(const GsBoundaries& b, double alpha_two_sided, double power);

/// One analysis of an endpoint's testing schedule.
struct Analysis {
  std::size_t event_target = 0;  // 0: time-driven analysis
  double critical = 0.0;  // reject when |Z| >= critical
};

/// Testing schedule of one endpoint with its allotted two-sided alpha.
struct EndpointSchedule {
  std::string name;
  double alpha = 0.0;
  std::vector<Analysis> analyses;
};

/// Alpha allocation across endpoints; the allotted alphas must sum to the
/// global level (within 1e-12).
struct GsDesign {
  double global_alpha = 0.05;
  std::vector<EndpointSchedule> endpoints;

  void validate() const;
};

}  // namespace trialmsm
