#pragma once

#include "trialmsm/design.hpp"
#include "trialmsm/simulation.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trialmsm {

/// Schema violation; `path()` is the dotted location of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Censoring given as "probability of censoring by horizon" instead of a rate.
struct CensoringShorthand {
  double probability = 0.0;
  double horizon = 0.0;

  double rate() const;
  bool operator==(const CensoringShorthand&) const = default;
};

struct DesignOverrides {
  std::optional<Accrual> accrual;
  std::optional<std::size_t> n_patients;
  std::optional<double> interim_fraction;  // group-sequential only

  bool operator==(const DesignOverrides&) const = default;
};

struct DesignConfig {
  double global_alpha = 0.05;
  double alpha_pfs = 0.01;
  double alpha_os = 0.04;
  double target_power = 0.8;
  double calibration_tolerance = 0.0;
  std::optional<double> hr_pfs;
  std::optional<double> hr_os;
  double ahr_horizon = 200.0;
  double enrolment_factor = 1.2;
  double fraction_horizon = 12.0;
  DesignOverrides coprimary;
  DesignOverrides group_sequential;

  bool operator==(const DesignConfig&) const = default;
};

struct RunConfig {
  std::size_t n_rep = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

struct AnalyticConfig {
  double horizon = 24.0;
  std::size_t points = 241;

  bool operator==(const AnalyticConfig&) const = default;
};

struct EstimateConfig {
  std::size_t min_at_risk = 1;
  std::optional<std::vector<double>> breaks_01;
  std::optional<std::vector<double>> breaks_02;
  std::optional<std::vector<double>> breaks_12;

  bool operator==(const EstimateConfig&) const = default;
};

struct ConfigDocument {
  Scenario scenario;
  std::optional<CensoringShorthand> censoring_shorthand;
  std::optional<std::size_t> n_patients;
  DesignConfig design;
  RunConfig run;
  AnalyticConfig analytic;
  EstimateConfig estimate;
  std::vector<std::string> warnings;  // not part of equality

  bool operator==(const ConfigDocument& o) const {
    return scenario == o.scenario && censoring_shorthand == o.censoring_shorthand &&
           n_patients == o.n_patients && design == o.design && run == o.run &&
           analytic == o.analytic && estimate == o.estimate;
  }

  /// Scenario with a design block's accrual override applied.
  Scenario scenario_for(const DesignOverrides& o) const;
  /// Workflow inputs for a design block.
  WorkflowInputs inputs_for(const DesignOverrides& o) const;
};

/// Parses and validates a JSON config document.
ConfigDocument parse_config(const std::string& text);

/// Canonical JSON with every default filled in.
std::string render_config(const ConfigDocument& doc);

}  // namespace trialmsm
