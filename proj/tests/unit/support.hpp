#pragma once

#include "trialmsm/simulation.hpp"

#include <cmath>
#include <memory>
#include <span>
#include <vector>

namespace testing {

inline trialmsm::ArmHazards s1_treatment() { return trialmsm::ArmHazards::constant(0.06, 0.30, 0.30); }
inline trialmsm::ArmHazards s1_control() { return trialmsm::ArmHazards::constant(0.10, 0.40, 0.30); }

struct ScenarioRates {
  double t01, t02, t12, c01, c02, c12;
};

inline constexpr ScenarioRates kScenarios[4] = {
    {0.06, 0.30, 0.30, 0.10, 0.40, 0.30},
    {0.30, 0.28, 0.50, 0.50, 0.30, 0.60},
    {0.140, 0.112, 0.250, 0.180, 0.150, 0.255},
    {0.18, 0.06, 0.17, 0.23, 0.07, 0.19},
};

inline trialmsm::Scenario scenario(int k, trialmsm::Accrual accrual = trialmsm::Accrual::instantaneous(),
                                   double censor_rate = -std::log(0.9) / 12.0) {
  const auto& r = kScenarios[k - 1];
  trialmsm::Scenario sc;
  sc.name = "Scenario " + std::to_string(k);
  sc.arms = {{"treatment", trialmsm::ArmHazards::constant(r.t01, r.t02, r.t12), 1.0},
             {"control", trialmsm::ArmHazards::constant(r.c01, r.c02, r.c12), 1.0}};
  sc.control = 1;
  sc.censoring = trialmsm::HazardSpec::constant(censor_rate);
  sc.accrual = accrual;
  return sc;
}

// std::vector<bool> cannot back a std::span<const bool>.
class Flags {
 public:
  explicit Flags(std::size_t n) : n_(n), data_(new bool[n]()) {}
  Flags(std::initializer_list<bool> v) : Flags(v.size()) {
    std::size_t i = 0;
    for (bool b : v) data_[i++] = b;
  }
  bool& operator[](std::size_t i) { return data_[i]; }
  std::span<const bool> span() const { return {data_.get(), n_}; }

 private:
  std::size_t n_;
  std::unique_ptr<bool[]> data_;
};

inline double mc_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace testing
