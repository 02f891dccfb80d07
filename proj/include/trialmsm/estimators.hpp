#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trialmsm {

/// Right-continuous step function: value `initial` before the first jump,
/// values[i] on [times[i], times[i+1]).
struct StepFunction {
  double initial = 0.0;
  Eigen::VectorXd times;
  Eigen::VectorXd values;

  double operator()(double t) const;
};

/// Per-patient composite-endpoint row.
struct EndpointRow {
  std::string id;
  std::string arm;
  double pfs_time = 0.0;
  bool pfs_event = false;
  double os_time = 0.0;
  bool os_event = false;
};

/// One sojourn in a transient state; `to` is empty when censored.
struct TransitionRow {
  int from = 0;
  std::optional<int> to;
  double entry = 0.0;
  double exit = 0.0;
};

/// Multistate representation of one patient (one or two rows).
struct MsmRecord {
  std::string id;
  std::string arm;
  std::vector<TransitionRow> rows;
};

class InvalidRecord : public std::invalid_argument {
 public:
  InvalidRecord(std::size_t row, const std::string& message)
      : std::invalid_argument("row " + std::to_string(row) + ": " + message), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Translates PFS/OS pairs into IDM transitions; throws InvalidRecord for
/// inconsistent rows (PFS after OS, death without a PFS event, time <= 0).
MsmRecord derive_idm_record(const EndpointRow& row, std::size_t index);

struct DerivedRecords {
  std::vector<MsmRecord> records;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // (row index, reason)
};

/// Row-wise derive_idm_record, collecting rejected rows instead of throwing.
DerivedRecords derive_idm_records(std::span<const EndpointRow> rows);

/// Kaplan-Meier survival; events precede censorings at tied times.
StepFunction kaplan_meier(std::span<const double> times, std::span<const bool> events);

/// Nelson-Aalen cumulative hazard of transition from -> to with left
/// truncation. Increments are zero while the risk set is below `min_at_risk`.
StepFunction nelson_aalen(std::span<const MsmRecord> records, int from, int to,
                          std::size_t min_at_risk = 1);

/// Aalen-Johansen transition-probability matrices P(s, t_k) at every
/// transition time t_k in (s, inf).
struct AalenJohansenPath {
  double start = 0.0;
  std::vector<double> times;
  std::vector<Eigen::Matrix3d> matrices;

  /// P(s, t); identity before the first transition.
  Eigen::Matrix3d at(double t) const;
};

AalenJohansenPath aalen_johansen_path(std::span<const MsmRecord> records, double s = 0.0);

/// P(s, t) by the Aalen-Johansen product integral.
Eigen::Matrix3d aalen_johansen(std::span<const MsmRecord> records, double s, double t);

/// Occurrence/exposure estimate of a piecewise-constant transition hazard.
struct PiecewiseFit {
  std::vector<double> breaks;
  std::vector<double> rates;
  std::vector<double> events;
  std::vector<double> exposure;
  std::vector<bool> zero_exposure;  // rate reported as 0 for these intervals
};

PiecewiseFit fit_piecewise_exponential(std::span<const MsmRecord> records, int from, int to,
                                       std::vector<double> breaks);

/// (A_a(t), A_b(t)) at the union of both jump sets, for a proportional
/// hazards diagnostic plot.
std::vector<std::pair<double, Eigen::Vector2d>> paired_cumulative(const StepFunction& a,
                                                                  const StepFunction& b);

}  // namespace trialmsm
