#include "trialmsm/hazard.hpp"
#include "trialmsm/numerics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace trialmsm;
using Catch::Approx;

TEST_CASE("hazard evaluation", "[hazard]") {
  CHECK(hazard_at(HazardSpec::constant(0.5), 3.0) == 0.5);
  CHECK(hazard_at(HazardSpec::piecewise({0, 1}, {0.2, 0.4}), 1.0) == 0.4);
  CHECK(hazard_at(HazardSpec::piecewise({0, 1}, {0.2, 0.4}), 0.999) == 0.2);
  CHECK(hazard_at(HazardSpec::weibull(1.0, 4.0), 7.0) == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("weibull shape 1 equals constant", "[hazard]") {
  const auto w = HazardSpec::weibull(1.0, 2.5);
  const auto c = HazardSpec::constant(0.4);
  for (double t : {0.0, 0.1, 1.0, 7.3, 100.0}) {
    CHECK(hazard_at(w, t) == Approx(hazard_at(c, t)).epsilon(1e-15));
    CHECK(cumulative_hazard(w, 0.3, t + 0.3) == Approx(cumulative_hazard(c, 0.3, t + 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("cumulative hazard", "[hazard]") {
  CHECK(cumulative_hazard(HazardSpec::constant(0.5), 0, 2) == Approx(1.0));
  CHECK(cumulative_hazard(HazardSpec::piecewise({0, 1}, {0.2, 0.4}), 0, 2) == Approx(0.6));
  const auto w = HazardSpec::weibull(2.0, 1.0);
  CHECK(cumulative_hazard(w, 0, 3) == Approx(9.0).epsilon(1e-14));
  const double quad = integrate([&](double t) { return hazard_at(w, t); }, 0.0, 3.0).value;
  CHECK(quad == Approx(9.0).epsilon(1e-10));
}

TEST_CASE("cumulative hazard inversion", "[hazard]") {
  CHECK(invert_cumulative_hazard(HazardSpec::constant(0.5), 0, 1.0) == Approx(2.0));
  const auto pw = HazardSpec::piecewise({0, 1}, {0.2, 0.4});
  CHECK(invert_cumulative_hazard(pw, 0, 0.4) == Approx(1.5).epsilon(1e-14));
  CHECK(cumulative_hazard(pw, 0, 1.5) == Approx(0.4).epsilon(1e-14));
  CHECK(std::isinf(invert_cumulative_hazard(HazardSpec::piecewise({0, 1}, {0.2, 0.0}), 0, 0.5)));
}

TEST_CASE("round-trip inversion property", "[hazard][property]") {
  const std::vector<HazardSpec> specs = {
      HazardSpec::constant(0.37),
      HazardSpec::piecewise({0, 0.5, 2, 6}, {0.1, 0.9, 0.0, 0.3}),
      HazardSpec::weibull(0.7, 3.0),
      HazardSpec::weibull(2.4, 1.5),
  };
  for (const auto& h : specs) {
    for (double a : {0.0, 0.25, 1.0, 3.7}) {
      for (double target : {1e-6, 0.01, 0.3, 1.0, 4.2}) {
        const double t = invert_cumulative_hazard(h, a, target);
        REQUIRE(std::isfinite(t));
        CHECK(std::abs(cumulative_hazard(h, a, t) - target) <= 1e-10 * std::max(1.0, target));
      }
    }
  }
}

TEST_CASE("entry-shifted hazard", "[hazard]") {
  const auto inner = HazardSpec::weibull(2.0, 1.0);
  const auto reset = HazardSpec::entry_shifted(inner, ClockMode::clock_reset);
  const auto forward = HazardSpec::entry_shifted(inner, ClockMode::clock_forward);
  CHECK(reset.needs_entry());
  CHECK(hazard_at(reset, 3.0, 1.0) == Approx(hazard_at(inner, 2.0)));
  CHECK(hazard_at(forward, 3.0, 1.0) == Approx(hazard_at(inner, 3.0)));
  CHECK(cumulative_hazard(reset, 1.0, 3.0, 1.0) == Approx(4.0));
  CHECK_THROWS(hazard_at(reset, 3.0));
  CHECK(reset.inner() == inner);
}

TEST_CASE("hazard validation", "[hazard]") {
  CHECK_THROWS_AS(HazardSpec::constant(-0.1), InvalidHazard);
  CHECK_THROWS_AS(HazardSpec::piecewise({0.5, 1}, {0.1, 0.2}), InvalidHazard);
  CHECK_THROWS_AS(HazardSpec::piecewise({0, 1, 1}, {0.1, 0.2, 0.3}), InvalidHazard);
  CHECK_THROWS_AS(HazardSpec::piecewise({0, 1}, {0.1}), InvalidHazard);
  CHECK_THROWS_AS(HazardSpec::weibull(0.0, 1.0), InvalidHazard);
  CHECK_THROWS_AS(HazardSpec::constant(std::nan("")), InvalidHazard);
}
