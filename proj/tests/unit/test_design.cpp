#include "support.hpp"
#include "trialmsm/design.hpp"
#include "trialmsm/numerics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace trialmsm;
using Catch::Approx;

namespace {

TrialDesign small_design(std::size_t n = 300) {
  TrialDesign d;
  d.n_patients = n;
  d.pfs_events = 150;
  d.os_events = 200;
  d.pfs_critical = normal_quantile(1 - 0.01 / 2);
  d.os_critical = normal_quantile(1 - 0.04 / 2);
  return d;
}

void check_same(const SimSummary& a, const SimSummary& b) {
  for (auto m : {&SimSummary::pfs, &SimSummary::os_interim, &SimSummary::os_final, &SimSummary::os,
                 &SimSummary::global, &SimSummary::joint}) {
    CHECK((a.*m).count == (b.*m).count);
    CHECK((a.*m).n == (b.*m).n);
  }
  CHECK(a.pfs_events.mean == b.pfs_events.mean);
  CHECK(a.os_interim_events.sd == b.os_interim_events.sd);
  CHECK(a.os_final_events.q95 == b.os_final_events.q95);
  CHECK(a.undefined_statistic == b.undefined_statistic);
}

}  // namespace

TEST_CASE("Monte Carlo proportions", "[design]") {
  const Proportion p{250, 1000};
  CHECK(p.value() == 0.25);
  CHECK(p.se() == Approx(std::sqrt(0.25 * 0.75 / 1000)));
  const auto c = CountSummary::of({5, 1, 3, 2, 4});
  CHECK(c.mean == 3.0);
  CHECK(c.min == 1);
  CHECK(c.max == 5);
  CHECK(c.median == 3);
}

TEST_CASE("design validation", "[design]") {
  auto d = small_design();
  CHECK_NOTHROW(d.validate());
  d.os_events = 301;
  CHECK_THROWS(d.validate());
  d = small_design();
  d.pfs_events = 0;
  CHECK_THROWS(d.validate());
}

TEST_CASE("degenerate critical values never reject", "[design]") {
  auto d = small_design();
  d.pfs_critical = kInf;
  d.os_critical = kInf;
  const auto s = estimate_alpha(testing::scenario(1), d, {200, 3, 1});
  CHECK(s.pfs.count == 0);
  CHECK(s.os.count == 0);
  CHECK(s.global.count == 0);
}

TEST_CASE("null-variant power equals alpha", "[design]") {
  const auto sc = testing::scenario(1, Accrual::uniform(12));
  const auto d = small_design();
  check_same(estimate_power(sc.as_null(), d, {300, 8, 1}), estimate_alpha(sc, d, {300, 8, 1}));
}

TEST_CASE("replication results do not depend on thread count", "[design][property]") {
  const auto sc = testing::scenario(2, Accrual::uniform(6));
  auto d = small_design();
  d.os_interim_critical = 3.2;
  const auto one = estimate_power(sc, d, {400, 17, 1});
  for (unsigned threads : {2u, 3u, 8u}) check_same(one, estimate_power(sc, d, {400, 17, threads}));
}

TEST_CASE("interim analysis adds rejections", "[design]") {
  const auto sc = testing::scenario(1, Accrual::uniform(6));
  auto d = small_design();
  const auto fixed = estimate_power(sc, d, {400, 2, 1});
  d.os_interim_critical = 2.5;
  const auto gs = estimate_power(sc, d, {400, 2, 1});
  CHECK(gs.os.count >= fixed.os.count);
  CHECK(gs.os_final.count <= gs.os.count);
  CHECK(gs.os_interim.count + gs.os_final.count == gs.os.count);
  CHECK(gs.os_interim_events.mean > 0.0);
}

TEST_CASE("event calibration", "[design]") {
  const auto sc = testing::scenario(1);
  SECTION("target below power at one event returns 1") {
    auto d = small_design();
    d.pfs_critical = 1e-9;
    const auto r = calibrate_events(sc, d, Endpoint::pfs, 0.8, 0.0, {100, 1, 1}, 16, 300);
    CHECK(r.events == 1);
  }
  SECTION("smallest count reaching the target") {
    const auto d = small_design(600);
    const auto r = calibrate_events(sc, d, Endpoint::pfs, 0.5, 0.0, {300, 4, 1}, 100, 600);
    CHECK(r.power.value() >= 0.5);
    bool below_found = false;
    for (const auto& p : r.trace) {
      if (p.events == r.events - 1) {
        below_found = true;
        CHECK(p.power.value() < 0.5);
      }
      if (p.events >= r.events) CHECK(p.power.value() >= 0.5);
    }
    CHECK(below_found);
  }
  SECTION("unreachable target") {
    const auto d = small_design();
    CHECK_THROWS_AS(calibrate_events(sc, d, Endpoint::pfs, 0.999, 0.0, {50, 1, 1}, 10, 20), BracketNotFound);
  }
}

TEST_CASE("expected event counts", "[design]") {
  const auto sc = testing::scenario(1);
  const double f = event_fraction(sc, Endpoint::os, 12.0);
  CHECK(expected_events(sc, Endpoint::os, 1000, 12.0) == Approx(1000 * f).epsilon(1e-9));
  const double t = expected_calendar_time(sc, Endpoint::pfs, 1000, 400.0);
  CHECK(expected_events(sc, Endpoint::pfs, 1000, t) == Approx(400.0).epsilon(1e-8));

  const auto staggered = testing::scenario(1, Accrual::uniform(24));
  CHECK(expected_events(staggered, Endpoint::os, 1000, 10.0) < expected_events(sc, Endpoint::os, 1000, 10.0));
  CHECK(expected_events(staggered, Endpoint::os, 1000, 500.0) ==
        Approx(1000 * event_fraction(sc, Endpoint::os, 480.0)).epsilon(1e-6));

  const std::size_t n = default_enrolment(sc, {{Endpoint::pfs, 433}, {Endpoint::os, 770}}, 1.2, 12.0);
  const double need = std::max(433 / event_fraction(sc, Endpoint::pfs, 12.0), 770 / f);
  CHECK(n == static_cast<std::size_t>(std::ceil(1.2 * need)));
}

TEST_CASE("co-primary planning", "[design]") {
  WorkflowInputs in;
  in.hr_pfs = 0.72;
  in.hr_os = 0.812;
  const auto d = plan_coprimary(testing::scenario(1), in);
  CHECK(d.pfs_events == 433);
  CHECK((d.os_events >= 769 && d.os_events <= 774));
  CHECK(d.pfs_critical == Approx(2.5758).margin(1e-4));
  CHECK(d.os_critical == Approx(2.0537).margin(1e-4));
}
