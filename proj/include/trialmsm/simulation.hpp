#pragma once

#include "trialmsm/hazard.hpp"
#include "trialmsm/idm.hpp"
#include "trialmsm/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trialmsm {

struct TrialArm {
  std::string label;
  ArmHazards hazards;
  double allocation = 1.0;

  bool operator==(const TrialArm&) const = default;
};

struct Accrual {
  enum class Kind { instantaneous, uniform };
  Kind kind = Kind::instantaneous;
  double duration = 0.0;  // uniform only

  static Accrual instantaneous() { return {}; }
  static Accrual uniform(double duration);

  bool operator==(const Accrual&) const = default;
};

/// A randomized trial: arms, independent random censoring, accrual.
///
/// With null_variant set, every arm is simulated with the control arm's
/// hazards while keeping its own allocation.
struct Scenario {
  std::string name;
  std::vector<TrialArm> arms;
  std::size_t control = 0;
  HazardSpec censoring = HazardSpec::constant(0.0);
  Accrual accrual;
  bool null_variant = false;

  /// Checks >= 2 arms, positive allocation, valid control index, censoring not entry-shifted.
  void validate() const;

  const ArmHazards& hazards_for(std::size_t arm) const {
    return arms[null_variant ? control : arm].hazards;
  }

  Scenario as_null() const {
    Scenario copy = *this;
    copy.null_variant = true;
    return copy;
  }

  /// Index of the first non-control arm.
  std::size_t experimental() const;

  bool operator==(const Scenario&) const = default;
};

enum class FirstTransition : std::uint8_t { progression, death };

/// Latent multistate trajectory of one patient.
struct PatientPath {
  double entry = 0.0;     // calendar time of randomization
  double t0 = 0.0;        // waiting time in state 0
  FirstTransition first = FirstTransition::death;
  std::optional<double> t1;  // waiting time in state 1 (progression only)
  double censor_offset = kInf;  // random censoring, time from entry
};

/// Censored observation of one patient, times measured from entry.
struct ObservedRecord {
  std::uint32_t id = 0;
  std::uint32_t arm = 0;
  double entry = 0.0;
  double pfs_time = 0.0;
  bool pfs_event = false;
  double os_time = 0.0;
  bool os_event = false;
  bool progression_observed = false;

  bool operator==(const ObservedRecord&) const = default;
};

/// Fixed positions of each patient's draws inside its Philox substream, so
/// that the same patient sees the same uniforms under every arm/hypothesis.
namespace draw {
inline constexpr std::uint32_t arm = 0;
inline constexpr std::uint32_t entry = 1;
inline constexpr std::uint32_t sojourn0 = 2;
inline constexpr std::uint32_t branch = 3;
inline constexpr std::uint32_t sojourn1 = 4;
inline constexpr std::uint32_t censor = 5;
}  // namespace draw

/// Nested competing-risks simulation of one IDM path (entry/censoring unset).
PatientPath simulate_patient(const ArmHazards& arm, const PatientStream& stream);

/// Applies a random-censoring offset to a path.
ObservedRecord observe(const PatientPath& path, double censor_offset);

/// One complete trial; deterministic in (master_seed, replication).
std::vector<ObservedRecord> simulate_trial(const Scenario& scenario, std::size_t n_patients,
                                           std::uint64_t master_seed, std::uint32_t replication);

/// Same as simulate_trial, reusing `out`'s storage.
void simulate_trial_into(const Scenario& scenario, std::size_t n_patients,
                         std::uint64_t master_seed, std::uint32_t replication,
                         std::vector<ObservedRecord>& out);

enum class Endpoint { pfs, os };

/// Event-driven administrative cut.
///
/// Events are ordered by (calendar time, patient id); the cut is the
/// `event_target`-th of them. A record's event is kept iff its
/// (calendar time, id) does not exceed the cut key.
struct DataCut {
  double time = kInf;
  std::uint32_t tie_id = UINT32_MAX;
  bool shortfall = false;

  static DataCut at_time(double t) { return {t, UINT32_MAX, false}; }

  /// True when an event at (calendar, id) is visible at this cut.
  bool covers(double calendar, std::uint32_t id) const {
    return calendar < time || (calendar == time && id <= tie_id);
  }
};

inline bool has_event(const ObservedRecord& r, Endpoint e) {
  return e == Endpoint::pfs ? r.pfs_event : r.os_event;
}

inline double time_of(const ObservedRecord& r, Endpoint e) {
  return e == Endpoint::pfs ? r.pfs_time : r.os_time;
}

/// Calendar time of the record's endpoint event or censoring.
inline double event_calendar(const ObservedRecord& r, Endpoint e) { return r.entry + time_of(r, e); }

/// (time, event) of `r` for `endpoint` as seen at the cut; requires r.entry < cut.time.
inline std::pair<double, bool> observed_at(const ObservedRecord& r, Endpoint e, const DataCut& cut) {
  if (has_event(r, e) && cut.covers(event_calendar(r, e), r.id)) return {time_of(r, e), true};
  return {std::min(time_of(r, e), cut.time - r.entry), false};
}

DataCut find_cut(std::span<const ObservedRecord> records, Endpoint endpoint,
                 std::size_t event_target);

/// Number of `endpoint` events visible at the cut.
std::size_t events_at(std::span<const ObservedRecord> records, Endpoint endpoint,
                      const DataCut& cut);

/// Snapshot at the cut: patients enrolled strictly before the cut, with
/// follow-up truncated at cut time and events kept per the cut key.
std::vector<ObservedRecord> apply_cut(std::span<const ObservedRecord> records, const DataCut& cut);

struct DataCutResult {
  DataCut cut;
  std::vector<ObservedRecord> snapshot;
};

DataCutResult datacut(std::span<const ObservedRecord> records, Endpoint endpoint,
                      std::size_t event_target);

}  // namespace trialmsm
