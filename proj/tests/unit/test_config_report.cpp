#include "support.hpp"
#include "trialmsm/config.hpp"
#include "trialmsm/report.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace trialmsm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fixture(int k) { return fs::path(TRIALMSM_SOURCE_DIR) / "configs" / ("scenario" + std::to_string(k) + ".json"); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trialmsm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

const char* kMinimal = R"({"scenario": {"arms": [
  {"label": "t", "hazards": {"h01": {"type": "constant", "rate": 0.06}, "h02": {"type": "constant", "rate": 0.3}, "h12": {"type": "constant", "rate": 0.3}}},
  {"label": "c", "hazards": {"h01": {"type": "constant", "rate": 0.1}, "h02": {"type": "constant", "rate": 0.4}, "h12": {"type": "constant", "rate": 0.3}}}],
  "control": "c"}})";

}  // namespace

TEST_CASE("scenario fixtures", "[config]") {
  const auto doc = parse_config(slurp(fixture(1)));
  REQUIRE(doc.scenario.arms.size() == 2);
  CHECK(doc.scenario.arms[0].hazards == ArmHazards::constant(0.06, 0.30, 0.30));
  CHECK(doc.scenario.arms[doc.scenario.control].hazards == ArmHazards::constant(0.10, 0.40, 0.30));
  CHECK(doc.scenario.censoring.constant_rate().value() == Catch::Approx(0.008780043));
  CHECK(doc.warnings.empty());
  for (int k = 1; k <= 4; ++k) {
    const auto d = parse_config(slurp(fixture(k)));
    const auto& r = testing::kScenarios[k - 1];
    CHECK(d.scenario.arms[0].hazards == ArmHazards::constant(r.t01, r.t02, r.t12));
    CHECK(d.scenario.arms[1].hazards == ArmHazards::constant(r.c01, r.c02, r.c12));
  }
}

TEST_CASE("config round trip", "[config][property]") {
  for (int k = 1; k <= 4; ++k) {
    const auto doc = parse_config(slurp(fixture(k)));
    const auto again = parse_config(render_config(doc));
    CHECK(again == doc);
    CHECK(render_config(again) == render_config(doc));
  }
  const std::string rich = R"({"scenario": {"name": "rich", "arms": [
    {"label": "a", "allocation": 2, "hazards": {"h01": {"type": "piecewise", "breaks": [0, 1.5], "rates": [0.1, 0.2]},
      "h02": {"type": "weibull", "shape": 1.3, "scale": 4}, "h12": {"type": "entry_shifted", "clock": "reset", "inner": {"type": "weibull", "shape": 0.9, "scale": 2}}}},
    {"label": "b", "hazards": {"h01": {"type": "constant", "rate": 0.1}, "h02": {"type": "constant", "rate": 0.2},
      "h12": {"type": "entry_shifted", "clock": "forward", "inner": {"type": "constant", "rate": 0.3}}}}],
    "control": "b", "censoring": {"type": "constant", "rate": 0.01}, "accrual": {"type": "uniform", "duration": 18}, "n_patients": 500},
    "design": {"hr_os": 0.8, "group_sequential": {"interim_fraction": 0.4, "n_patients": 900}},
    "estimate": {"min_at_risk": 5, "piecewise_breaks": {"h12": [0, 2, 4]}}})";
  const auto doc = parse_config(rich);
  CHECK(parse_config(render_config(doc)) == doc);
  CHECK(doc.inputs_for(doc.design.group_sequential).n_patients == 900u);
  CHECK(doc.inputs_for(doc.design.coprimary).n_patients == 500u);
}

TEST_CASE("config errors name the offending key", "[config]") {
  std::string neg = kMinimal;
  neg.replace(neg.find("0.06"), 4, "-0.06");
  CHECK(error_path(neg) == "scenario.arms[0].hazards.h01.rate");

  std::string unknown = kMinimal;
  unknown.replace(unknown.find("\"control\""), 0, "\"colour\": 1, ");
  CHECK(error_path(unknown) == "scenario.colour");

  std::string bad_control = kMinimal;
  bad_control.replace(bad_control.find("\"c\"}}"), 3, "\"x\"");
  CHECK(error_path(bad_control) == "scenario.control");

  CHECK(error_path("{") == "<document>");
  CHECK(error_path(R"({"scenario": {}})") == "scenario.arms");

  std::string shifted = kMinimal;
  shifted.replace(shifted.find(R"({"type": "constant", "rate": 0.06})"), 34,
                  R"({"type": "entry_shifted", "clock": "reset", "inner": {"type": "constant", "rate": 0.06}})");
  CHECK(error_path(shifted) == "scenario.arms[0].hazards.h01");

  std::string alphas = kMinimal;
  alphas.insert(alphas.size() - 1, R"(, "design": {"alpha_pfs": 0.02})");
  CHECK(error_path(alphas) == "design");
}

TEST_CASE("missing censoring defaults to zero with a warning", "[config]") {
  const auto doc = parse_config(kMinimal);
  CHECK(doc.scenario.censoring.constant_rate() == 0.0);
  REQUIRE(doc.warnings.size() == 1);
  CHECK(doc.warnings[0].find("censoring") != std::string::npos);
}

TEST_CASE("CSV formatting", "[report]") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(0.72) == "0.72");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
  CsvTable t({"a", "b,c"});
  t.add_row({std::string("x\"y"), 2.5});
  t.add_row({std::monostate{}, std::int64_t{7}});
  CHECK(t.str() == "a,\"b,c\"\r\n\"x\"\"y\",2.5\r\n,7\r\n");
  CHECK_THROWS(t.add_row({1.0}));
  CHECK(split_csv_line("\"x\"\"y\",2.5,,\"a,b\"") == std::vector<std::string>{"x\"y", "2.5", "", "a,b"});
}

TEST_CASE("endpoint ingestion", "[report]") {
  std::istringstream good("id,arm,pfs_time,pfs_event,os_time,os_event\r\n"
                          "1,A,5,1,9,1\r\n2,A,7,1,7,1\r\n3,B,4,0,4,0\r\n");
  const auto ok = ingest_endpoints(good);
  REQUIRE(ok.records.size() == 3);
  CHECK(ok.rejected.empty());
  CHECK(ok.records[0].rows.size() == 2);
  CHECK(ok.records[1].rows[0].to == 2);
  CHECK(!ok.records[2].rows[0].to);

  std::istringstream bad("id,arm,pfs_time,pfs_event,os_time,os_event\n"
                         "1,A,5,1,9,1\n2,A,7,2,7,1\n3,B,abc,0,4,0\n4,B,9,1,5,1\n5,B,1,1\n");
  const auto res = ingest_endpoints(bad);
  CHECK(res.records.size() == 1);
  REQUIRE(res.rejected.size() == 4);
  CHECK(res.rejected[0].first == 3);
  CHECK(res.rejected[1].first == 4);
  CHECK(res.rejected[2].first == 5);
  CHECK(res.rejected[3].first == 6);

  std::istringstream header("id,arm,pfs,pfs_event,os_time,os_event\n1,A,5,1,9,1\n");
  CHECK_THROWS_AS(ingest_endpoints(header), std::runtime_error);
}

TEST_CASE("analytic curves", "[report]") {
  auto doc = parse_config(slurp(fixture(1)));
  const auto dir = scratch("analytic");
  const auto files = write_analytic(doc, dir);
  CHECK(std::find(files.begin(), files.end(), "curves_treatment.csv") != files.end());
  std::ifstream f(dir / "curves_treatment.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "t,S_PFS,S_OS,h_OS,HR_PFS,HR_OS\r");
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    const auto cells = split_csv_line(line.substr(0, line.size() - 1));
    CHECK(std::stod(cells[4]) == Catch::Approx(0.72).epsilon(1e-14));
    ++rows;
  }
  CHECK(rows == doc.analytic.points);
}

TEST_CASE("outputs are byte-identical across thread counts", "[report][property]") {
  auto doc = parse_config(slurp(fixture(1)));
  const auto sc = doc.scenario_for(doc.design.group_sequential);
  auto in = doc.inputs_for(doc.design.group_sequential);
  std::vector<std::string> contents;
  for (unsigned threads : {1u, 4u}) {
    const McOptions mc{200, 5, threads};
    const auto dir = scratch("threads" + std::to_string(threads));
    std::string all;
    for (const auto& name : write_group_sequential(run_group_sequential_workflow(sc, in, mc), dir)) {
      all += name + "\n" + slurp(dir / name);
    }
    for (const auto& name : write_trials(sc, 300, {3, 5, threads}, dir)) all += name + "\n" + slurp(dir / name);
    contents.push_back(all);
  }
  CHECK(contents[0] == contents[1]);
}

TEST_CASE("estimate outputs", "[report]") {
  auto doc = parse_config(slurp(fixture(1)));
  doc.estimate.breaks_01 = std::vector<double>{0.0, 2.0};
  const auto dir = scratch("estimate");
  write_trials(doc.scenario, 400, {1, 9, 1}, dir);
  const auto data = ingest_endpoints(dir / "trial_00000.csv");
  CHECK(data.rejected.empty());
  CHECK(data.records.size() == 400);
  const auto files = write_estimates(data, doc.estimate, dir);
  for (const char* f : {"kaplan_meier.csv", "nelson_aalen.csv", "aalen_johansen.csv", "ph_diagnostic.csv",
                        "piecewise_fit.csv", "rejected_rows.csv"}) {
    CHECK(std::find(files.begin(), files.end(), f) != files.end());
    CHECK(fs::exists(dir / f));
  }
}
