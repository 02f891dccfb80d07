#include "trialmsm/config.hpp"
#include "trialmsm/design.hpp"
#include "trialmsm/estimators.hpp"
#include "trialmsm/idm.hpp"
#include "trialmsm/inference.hpp"
#include "trialmsm/numerics.hpp"
#include "trialmsm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace trialmsm;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    details.push_back(std::string(ok ? "ok   " : "MISS ") + buf);
    pass = pass && ok;
  }
  void note(const std::string& s) { details.push_back("info " + s); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ConfigDocument fixture(int k) {
  return parse_config(slurp(fs::path(TRIALMSM_SOURCE_DIR) / "configs" / ("scenario" + std::to_string(k) + ".json")));
}

McOptions mc_for(const ConfigDocument& doc) {
  return {doc.run.n_rep, doc.run.seed, std::max(1u, std::thread::hardware_concurrency())};
}

bool within_se(const Proportion& p, double target, double k = 3.0) {
  return std::abs(p.value() - target) <= k * p.se();
}

double pct(const Proportion& p) { return 100.0 * p.value(); }
double pct_se(const Proportion& p) { return 100.0 * p.se(); }

const double kHrPfs[4] = {0.720, 0.725, 0.764, 0.800};
const double kAhrOs[4] = {0.812, 0.804, 0.821, 0.841};

void criterion_1_2(Criterion& c1, Criterion& c2) {
  for (int k = 1; k <= 4; ++k) {
    const auto doc = fixture(k);
    const auto& sc = doc.scenario;
    const auto& a = sc.arms[sc.experimental()].hazards;
    const auto& b = sc.arms[sc.control].hazards;
    const double hr = hr_pfs(a, b);
    c1.check(std::round(hr * 1000) == std::round(kHrPfs[k - 1] * 1000), "scenario %d hr_pfs %.6f (target %.3f)", k,
             hr, kHrPfs[k - 1]);
    const double ahr = average_hr_os(a, b, doc.design.ahr_horizon);
    c2.check(std::abs(ahr - kAhrOs[k - 1]) <= 0.015, "scenario %d average_hr_os %.4f (target %.3f +- 0.015)", k, ahr,
             kAhrOs[k - 1]);
  }
}

void criterion_3(Criterion& c) {
  const auto pfs = schoenfeld_events(0.72, 0.01, 0.8);
  c.check(pfs == 433, "PFS events %zu (target 433)", pfs);
  const auto os = schoenfeld_events(0.812, 0.04, 0.8);
  c.check(os >= 769 && os <= 774, "OS events %zu (target [769, 774]; unrounded %.3f)", os,
          schoenfeld_events_exact(0.812, 0.04, 0.8));
}

void criterion_7(Criterion& c) {
  const auto b = gs_boundaries(0.04, 310.0 / 774.0);
  c.check(std::abs(b.c1 - 3.498) <= 0.01, "c1 %.4f (target 3.498 +- 0.01)", b.c1);
  c.check(std::abs(b.c2 - 2.055) <= 0.01, "c2 %.4f (target 2.055 +- 0.01)", b.c2);
  c.check(std::abs(100 * b.spent_interim - 0.05) <= 0.01, "interim two-sided spend %.4f%% (target 0.05 +- 0.01 pp)",
          100 * b.spent_interim);
}

void criteria_4_5(Criterion& c4, Criterion& c5, std::vector<CoprimaryReport>& reports) {
  const double alpha_pfs[4] = {0.010, 0.009, 0.011, 0.0096};
  const double alpha_os[4] = {0.0382, 0.0395, 0.0383, 0.0387};
  const double alpha_global[4] = {0.0456, 0.0468, 0.0462, 0.0467};
  const std::size_t os_target[4] = {630, 747, 742, 963};
  const std::size_t pfs_target[4] = {433, 452, 644, 940};
  for (int k = 1; k <= 4; ++k) {
    const auto doc = fixture(k);
    const auto& o = doc.design.coprimary;
    const auto rep = run_coprimary_workflow(doc.scenario_for(o), doc.inputs_for(o), mc_for(doc));
    const auto& n = rep.null_at_planned;
    c4.note("scenario " + std::to_string(k) + ": N " + std::to_string(rep.planned.n_patients) + ", events (" +
            std::to_string(rep.planned.pfs_events) + ", " + std::to_string(rep.planned.os_events) + ")");
    if (k == 1) {
      c4.check(within_se(n.pfs, alpha_pfs[0]), "scenario 1 alpha_PFS %.2f%% (SE %.2f; target %.2f)", pct(n.pfs),
               pct_se(n.pfs), 100 * alpha_pfs[0]);
      c4.check(within_se(n.os, alpha_os[0]), "scenario 1 alpha_OS %.2f%% (SE %.2f; target %.2f)", pct(n.os),
               pct_se(n.os), 100 * alpha_os[0]);
    } else {
      char buf[160];
      std::snprintf(buf, sizeof buf, "scenario %d alpha_PFS %.2f%% (reference %.2f), alpha_OS %.2f%% (reference %.2f)", k,
                    pct(n.pfs), 100 * alpha_pfs[k - 1], pct(n.os), 100 * alpha_os[k - 1]);
      c4.note(buf);
    }
    c4.check(within_se(n.global, alpha_global[k - 1]), "scenario %d alpha_global %.2f%% (SE %.2f; target %.2f)", k,
             pct(n.global), pct_se(n.global), 100 * alpha_global[k - 1]);

    const double os_dev = double(rep.calibrated.os_events) / os_target[k - 1] - 1.0;
    const double pfs_dev = double(rep.calibrated.pfs_events) / pfs_target[k - 1] - 1.0;
    c5.check(std::abs(os_dev) <= 0.05, "scenario %d calibrated OS events %zu (target %zu +- 5%%; %+.2f%%)", k,
             rep.calibrated.os_events, os_target[k - 1], 100 * os_dev);
    c5.check(std::abs(pfs_dev) <= 0.01, "scenario %d calibrated PFS events %zu (target %zu +- 1%%; %+.2f%%)", k,
             rep.calibrated.pfs_events, pfs_target[k - 1], 100 * pfs_dev);
    reports.push_back(rep);
  }
}

void criterion_6(Criterion& c, const CoprimaryReport& s1) {
  const auto doc = fixture(1);
  TrialDesign d = s1.planned;
  d.pfs_events = 433;
  d.os_events = 770;
  const auto sim = estimate_power(doc.scenario_for(doc.design.coprimary), d, mc_for(doc));
  c.note("design: N " + std::to_string(d.n_patients) + ", 433 PFS / 770 OS events");
  c.check(std::abs(pct(sim.pfs) - 80.9) <= 1.5, "PFS power %.2f%% (SE %.2f; target 80.9 +- 1.5)", pct(sim.pfs),
          pct_se(sim.pfs));
  c.check(std::abs(pct(sim.os) - 87.2) <= 1.5, "OS power %.2f%% (SE %.2f; target 87.2 +- 1.5)", pct(sim.os),
          pct_se(sim.os));
  c.check(std::abs(pct(sim.joint) - 71.1) <= 1.5, "joint power %.2f%% (SE %.2f; target 71.1 +- 1.5)", pct(sim.joint),
          pct_se(sim.joint));
}

void criterion_8(Criterion& c) {
  const std::size_t fa_target[4] = {524, 826, 613, 919};
  const double alpha_os[4] = {0.0404, 0.0408, 0.0401, 0.0404};
  const double alpha_global[4] = {0.0484, 0.0480, 0.0474, 0.0481};
  for (int k = 1; k <= 4; ++k) {
    const auto doc = fixture(k);
    const auto& o = doc.design.group_sequential;
    const auto rep = run_group_sequential_workflow(doc.scenario_for(o), doc.inputs_for(o), mc_for(doc));
    char buf[256];
    std::snprintf(buf, sizeof buf, "scenario %d: N %zu, t1 %.3f, c1 %.3f, c2 %.3f, planned FA %zu, realized IA mean %.1f",
                  k, rep.planned.n_patients, rep.planned_fraction, rep.boundaries.c1, rep.boundaries.c2,
                  rep.planned.os_events, rep.power_at_calibrated.os_interim_events.mean);
    c.note(buf);
    const double dev = double(rep.calibrated.os_events) / fa_target[k - 1] - 1.0;
    c.check(std::abs(dev) <= 0.05, "scenario %d calibrated OS FA events %zu (target %zu +- 5%%; %+.2f%%)", k,
            rep.calibrated.os_events, fa_target[k - 1], 100 * dev);
    const auto& n = rep.null_at_planned;
    c.check(within_se(n.os, alpha_os[k - 1]), "scenario %d cumulative alpha_OS %.2f%% (SE %.2f; target %.2f)", k,
            pct(n.os), pct_se(n.os), 100 * alpha_os[k - 1]);
    c.check(within_se(n.global, alpha_global[k - 1]), "scenario %d alpha_global %.2f%% (SE %.2f; target %.2f)", k,
            pct(n.global), pct_se(n.global), 100 * alpha_global[k - 1]);
  }
}

void criterion_9(Criterion& c) {
  {
    const std::vector<HazardSpec> specs = {HazardSpec::constant(0.37),
                                           HazardSpec::piecewise({0, 0.5, 2, 6}, {0.1, 0.9, 0.0, 0.3}),
                                           HazardSpec::weibull(0.7, 3.0), HazardSpec::weibull(2.4, 1.5)};
    double worst = 0.0;
    for (const auto& h : specs) {
      for (double a : {0.0, 0.25, 1.0, 3.7}) {
        for (double target : {1e-6, 0.01, 0.3, 1.0, 4.2}) {
          const double t = invert_cumulative_hazard(h, a, target);
          worst = std::max(worst, std::abs(cumulative_hazard(h, a, t) - target) / std::max(1.0, target));
        }
      }
    }
    c.check(worst <= 1e-10, "hazard round-trip inversion max error %.2e (<= 1e-10)", worst);
  }

  double identity = 0.0, deriv = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const auto doc = fixture(k);
    for (const auto& arm : doc.scenario.arms) {
      const auto& h = arm.hazards;
      for (double t = 0.0; t <= 30.0; t += 0.37) identity = std::max(identity, std::abs(s_os(h, t) - s_pfs(h, t) - p01(h, t)));
      const double step = 1e-4;
      for (double t = step; t <= 24.0; t += 0.5) {
        const double num = -(s_os(h, t + step) - s_os(h, t - step)) / (2 * step) / s_os(h, t);
        deriv = std::max(deriv, std::abs(h_os(h, t) - num));
      }
    }
  }
  c.check(identity <= 1e-12, "s_os - s_pfs = p01 max error %.2e (<= 1e-12)", identity);
  c.check(deriv <= 1e-6, "h_os vs numerical derivative of S_OS max error %.2e (<= 1e-6)", deriv);

  auto to_rows = [](const std::vector<ObservedRecord>& recs) {
    std::vector<EndpointRow> rows;
    for (const auto& r : recs) rows.push_back({std::to_string(r.id), "x", r.pfs_time, r.pfs_event, r.os_time, r.os_event});
    return rows;
  };
  {
    Scenario sc;
    const auto two_state = ArmHazards::constant(0.0, 0.4, 0.3);
    sc.arms = {{"x", two_state, 1.0}, {"y", two_state, 1.0}};
    sc.censoring = HazardSpec::constant(0.05);
    const auto rows = to_rows(simulate_trial(sc, 5000, 41, 0));
    const auto recs = derive_idm_records(rows).records;
    std::vector<double> t;
    std::unique_ptr<bool[]> e(new bool[rows.size()]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      t.push_back(rows[i].os_time);
      e[i] = rows[i].os_event;
    }
    const auto km = kaplan_meier(t, std::span<const bool>(e.get(), rows.size()));
    const auto aj = aalen_johansen_path(recs);
    bool exact = aj.times.size() == static_cast<std::size_t>(km.times.size());
    for (std::size_t k = 0; exact && k < aj.times.size(); ++k) {
      exact = aj.times[k] == km.times[Eigen::Index(k)] && aj.matrices[k](0, 0) == km.values[Eigen::Index(k)];
    }
    c.check(exact, "AJ P00 equals OS Kaplan-Meier exactly on two-state data (%zu jump times)", aj.times.size());
  }
  {
    const auto doc = fixture(1);
    const auto rows = to_rows(simulate_trial(doc.scenario, 5000, 42, 0));
    const auto aj = aalen_johansen_path(derive_idm_records(rows).records);
    double worst = 0.0;
    for (const auto& p : aj.matrices) {
      for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(p.row(i).sum() - 1.0));
    }
    c.check(worst <= 1e-12, "AJ row sums max deviation %.2e (<= 1e-12)", worst);
  }
  {
    const auto arm = ArmHazards::constant(0.10, 0.40, 0.30);
    const std::size_t n = 1'000'000;
    std::vector<double> pfs, os;
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto p = simulate_patient(arm, PatientStream(20231015, 0, i));
      pfs.push_back(p.t0);
      os.push_back(p.t0 + p.t1.value_or(0.0));
    }
    auto sup = [&](std::vector<double>& v, auto&& surv) {
      std::sort(v.begin(), v.end());
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = 1.0 - surv(v[i]);
        s = std::max({s, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
      }
      return s;
    };
    const double d_pfs = sup(pfs, [&](double t) { return s_pfs(arm, t); });
    const double d_os = sup(os, [&](double t) { return s_os(arm, t); });
    c.check(std::max(d_pfs, d_os) < 0.01, "empirical vs analytic sup-distance at 1e6 patients PFS %.5f, OS %.5f (< 0.01)",
            d_pfs, d_os);
  }
  {
    const std::size_t reps = 10000, n = 200;
    const double crit = normal_quantile(0.975);
    std::size_t rejections = 0;
    std::vector<LogrankObs> obs(n);
    for (std::uint32_t rep = 0; rep < reps; ++rep) {
      for (std::uint32_t i = 0; i < n; ++i) {
        const PatientStream s(20231015, rep, i, 1);
        const double t = s.exponential(0) / 0.3;
        const double cens = s.exponential(1) / 0.1;
        obs[i] = {std::min(t, cens), t <= cens, static_cast<std::uint8_t>(s.uniform(2) < 0.5)};
      }
      const auto z = logrank_z(obs);
      rejections += z && std::abs(*z) >= crit;
    }
    const Proportion p{rejections, reps};
    c.check(std::abs(p.value() - 0.05) <= 3 * std::sqrt(0.05 * 0.95 / reps),
            "null log-rank rejection rate %.2f%% at alpha 5%% (3 SE = %.2f pp)", pct(p), 300 * std::sqrt(0.05 * 0.95 / reps));
  }
  {
    auto doc = fixture(1);
    std::vector<std::string> outputs;
    for (unsigned threads : {1u, 4u}) {
      const fs::path dir = fs::temp_directory_path() / ("trialmsm_acceptance_t" + std::to_string(threads));
      fs::remove_all(dir);
      fs::create_directories(dir);
      const McOptions mc{500, doc.run.seed, threads};
      std::string all;
      const auto& o = doc.design.group_sequential;
      for (const auto& f : write_group_sequential(run_group_sequential_workflow(doc.scenario_for(o), doc.inputs_for(o), mc), dir)) {
        all += f + "\n" + slurp(dir / f);
      }
      for (const auto& f : write_trials(doc.scenario, 500, {2, doc.run.seed, threads}, dir)) all += f + "\n" + slurp(dir / f);
      outputs.push_back(all);
    }
    c.check(outputs[0] == outputs[1], "outputs byte-identical for 1 and 4 threads (%zu bytes)", outputs[0].size());
  }
}

}  // namespace

int main() {
  std::vector<Criterion> cs = {
      {1, "PFS hazard ratios"},
      {2, "average OS hazard ratios"},
      {3, "Schoenfeld event counts"},
      {4, "co-primary empirical alphas"},
      {5, "co-primary calibrated event counts"},
      {6, "co-primary power at 433/770 events"},
      {7, "group-sequential boundaries"},
      {8, "group-sequential calibration and alphas"},
      {9, "property suites"},
  };
  std::vector<CoprimaryReport> coprimary;
  criterion_1_2(cs[0], cs[1]);
  criterion_3(cs[2]);
  criteria_4_5(cs[3], cs[4], coprimary);
  criterion_6(cs[5], coprimary.front());
  criterion_7(cs[6]);
  criterion_8(cs[7]);
  criterion_9(cs[8]);

  bool all = true;
  for (const auto& c : cs) {
    for (const auto& d : c.details) std::printf("    [%d] %s\n", c.id, d.c_str());
  }
  std::printf("\n");
  for (const auto& c : cs) {
    std::printf("criterion %d: %s  %s\n", c.id, c.pass ? "PASS" : "FAIL", c.name.c_str());
    all = all && c.pass;
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
