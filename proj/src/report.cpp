#include "trialmsm/report.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace trialmsm {

namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

double os_hazard(const ArmHazards& arm, double t) {
  return arm.is_constant() ? h_os(arm, t) : os_hazard_general(arm, t);
}

double pfs_hazard(const ArmHazards& arm, double t) {
  return hazard_at(arm.h01, t) + hazard_at(arm.h02, t);
}

// h12 against time since randomization (clock-forward) or since progression (clock-reset).
double h12_curve(const ArmHazards& arm, double t) {
  return arm.h12.needs_entry() ? hazard_at(arm.h12, t, 0.0) : hazard_at(arm.h12, t);
}

CsvTable::Cell ratio_cell(double num, double den) {
  if (den == 0.0) return std::monostate{};
  return num / den;
}

ojson proportion_json(const Proportion& p) {
  ojson o;
  o["count"] = p.count;
  o["n"] = p.n;
  o["estimate"] = p.value();
  o["se"] = p.se();
  return o;
}

ojson counts_json(const CountSummary& c) {
  ojson o;
  o["mean"] = c.mean;
  o["sd"] = c.sd;
  o["min"] = c.min;
  o["q05"] = c.q05;
  o["median"] = c.median;
  o["q95"] = c.q95;
  o["max"] = c.max;
  return o;
}

ojson summary_json(const SimSummary& s) {
  ojson o;
  o["n_rep"] = s.n_rep;
  o["seed"] = s.seed;
  o["pfs"] = proportion_json(s.pfs);
  o["os_interim"] = proportion_json(s.os_interim);
  o["os_final"] = proportion_json(s.os_final);
  o["os"] = proportion_json(s.os);
  o["global"] = proportion_json(s.global);
  o["joint"] = proportion_json(s.joint);
  o["pfs_shortfall"] = s.pfs_shortfall;
  o["os_shortfall"] = s.os_shortfall;
  o["undefined_statistic"] = s.undefined_statistic;
  o["pfs_events"] = counts_json(s.pfs_events);
  o["os_interim_events"] = counts_json(s.os_interim_events);
  o["os_final_events"] = counts_json(s.os_final_events);
  return o;
}

ojson design_json(const TrialDesign& d) {
  ojson o;
  o["n_patients"] = d.n_patients;
  o["pfs_events"] = d.pfs_events;
  o["pfs_critical"] = d.pfs_critical;
  o["os_events"] = d.os_events;
  o["os_critical"] = d.os_critical;
  if (d.os_interim_critical) {
    o["os_interim"] = "calendar time of the PFS final analysis";
    o["os_interim_critical"] = *d.os_interim_critical;
  }
  return o;
}

ojson calibration_json(const CalibrationResult& c) {
  ojson o;
  o["events"] = c.events;
  o["power"] = proportion_json(c.power);
  o["monotone_violations"] = c.monotone_violations;
  o["monotone_noise"] = c.monotone_noise;
  o["trace"] = ojson::array();
  for (const auto& p : c.trace) {
    ojson t;
    t["events"] = p.events;
    t["power"] = p.power.value();
    t["se"] = p.power.se();
    o["trace"].push_back(t);
  }
  return o;
}

void add_trace(CsvTable& t, const std::string& endpoint, const CalibrationResult& c) {
  for (std::size_t i = 0; i < c.trace.size(); ++i) {
    const auto& p = c.trace[i];
    t.add_row({endpoint, cell(i + 1), cell(p.events), p.power.value(), p.power.se()});
  }
}

std::vector<CsvTable::Cell> with_se(std::vector<CsvTable::Cell> row, const Proportion& p) {
  row.emplace_back(p.value());
  row.emplace_back(p.se());
  return row;
}

template <typename... P>
std::vector<CsvTable::Cell> with_se(std::vector<CsvTable::Cell> row, const Proportion& p,
                                    const P&... rest) {
  return with_se(with_se(std::move(row), p), rest...);
}

std::string transition_name(int from, int to) { return std::to_string(from) + std::to_string(to); }

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(std::vector<Cell> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CSV row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const auto& items, auto&& render) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ',';
      out += render(items[i]);
    }
    out += "\r\n";
  };
  line(header_, [](const std::string& s) { return quote(s); });
  for (const auto& row : rows_) {
    line(row, [](const Cell& c) {
      return std::visit(
          [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, std::string>) return quote(v);
            else if constexpr (std::is_same_v<T, double>) return format_number(v);
            else return std::to_string(v);
          },
          c);
    });
  }
  return out;
}

void CsvTable::write(const fs::path& path) const { write_text(path, str()); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

IngestedEndpoints ingest_endpoints(std::istream& in) {
  static const std::vector<std::string> expected = {"id",      "arm",     "pfs_time",
                                                    "pfs_event", "os_time", "os_event"};
  IngestedEndpoints out;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw std::runtime_error("line 1: missing header");
  if (!line.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (split_csv_line(line) != expected) {
    throw std::runtime_error("line 1: header must be exactly id,arm,pfs_time,pfs_event,os_time,os_event");
  }
  auto parse_time = [](const std::string& s, const char* what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw std::invalid_argument(std::string(what) + " is not a number: '" + s + "'");
    }
    return v;
  };
  auto parse_event = [](const std::string& s, const char* what) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw std::invalid_argument(std::string(what) + " must be 1 or 0, got '" + s + "'");
  };
  std::vector<EndpointRow> parsed;
  while (next_line()) {
    if (line.empty()) continue;
    try {
      const auto f = split_csv_line(line);
      if (f.size() != expected.size()) {
        throw std::invalid_argument("expected 6 fields, got " + std::to_string(f.size()));
      }
      EndpointRow row{f[0], f[1], parse_time(f[2], "pfs_time"), parse_event(f[3], "pfs_event"),
                      parse_time(f[4], "os_time"), parse_event(f[5], "os_event")};
      out.rows.push_back(row);
      out.row_lines.push_back(line_no);
    } catch (const std::invalid_argument& e) {
      out.rejected.emplace_back(line_no, e.what());
    }
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    try {
      out.records.push_back(derive_idm_record(out.rows[i], i));
    } catch (const InvalidRecord& e) {
      std::string msg = e.what();
      msg = msg.substr(msg.find(": ") + 2);
      out.rejected.emplace_back(out.row_lines[i], msg);
    }
  }
  std::sort(out.rejected.begin(), out.rejected.end());
  return out;
}

IngestedEndpoints ingest_endpoints(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return ingest_endpoints(f);
}

std::vector<std::string> write_analytic(const ConfigDocument& doc, const fs::path& out_dir) {
  const Scenario& sc = doc.scenario;
  const ArmHazards& control = sc.arms[sc.control].hazards;
  const std::size_t points = doc.analytic.points;
  const Eigen::VectorXd grid =
      Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(points), 0.0, doc.analytic.horizon);
  std::vector<std::string> files;

  CsvTable table1({"scenario", "arm", "h01", "h02", "h12", "hr_pfs", "average_hr_os"});
  for (std::size_t a = 0; a < sc.arms.size(); ++a) {
    const auto& arm = sc.arms[a];
    std::vector<CsvTable::Cell> row{sc.name, arm.label};
    for (const HazardSpec* h : {&arm.hazards.h01, &arm.hazards.h02, &arm.hazards.h12}) {
      if (auto r = h->constant_rate()) row.emplace_back(*r);
      else row.emplace_back(std::monostate{});
    }
    const bool closed = arm.hazards.is_constant() && control.is_constant() && a != sc.control;
    if (closed) {
      row.emplace_back(hr_pfs(arm.hazards, control));
      row.emplace_back(average_hr_os(arm.hazards, control, doc.design.ahr_horizon));
    } else {
      row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
    }
    table1.add_row(std::move(row));
  }
  table1.write(out_dir / "table1.csv");
  files.push_back("table1.csv");

  std::vector<std::string> hz_head{"t"}, surv_head{"t"}, oshz_head{"t"}, hr_head{"t"};
  for (std::size_t a = 0; a < sc.arms.size(); ++a) {
    const std::string& l = sc.arms[a].label;
    for (const char* k : {"h01_", "h02_", "h12_"}) hz_head.push_back(k + l);
    surv_head.push_back("S_PFS_" + l);
    surv_head.push_back("S_OS_" + l);
    oshz_head.push_back("h_OS_" + l);
    if (a != sc.control) {
      hr_head.push_back("HR_PFS_" + l);
      hr_head.push_back("HR_OS_" + l);
    }
  }
  CsvTable hazards(hz_head), survival(surv_head), os_hz(oshz_head), ratios(hr_head);
  std::vector<CsvTable> curves;
  for (std::size_t a = 0; a < sc.arms.size(); ++a) {
    curves.emplace_back(std::vector<std::string>{"t", "S_PFS", "S_OS", "h_OS", "HR_PFS", "HR_OS"});
  }
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    std::vector<CsvTable::Cell> hz{t}, sv{t}, oh{t}, hr{t};
    const double ctrl_pfs = pfs_hazard(control, t);
    const double ctrl_os = os_hazard(control, t);
    for (std::size_t a = 0; a < sc.arms.size(); ++a) {
      const ArmHazards& arm = sc.arms[a].hazards;
      hz.emplace_back(hazard_at(arm.h01, t));
      hz.emplace_back(hazard_at(arm.h02, t));
      hz.emplace_back(h12_curve(arm, t));
      const double spfs = s_pfs(arm, t);
      const double sos = s_os(arm, t);
      const double hos = os_hazard(arm, t);
      sv.emplace_back(spfs);
      sv.emplace_back(sos);
      oh.emplace_back(hos);
      const auto hr_pfs_t = ratio_cell(pfs_hazard(arm, t), ctrl_pfs);
      const auto hr_os_t = ratio_cell(hos, ctrl_os);
      if (a != sc.control) {
        hr.push_back(hr_pfs_t);
        hr.push_back(hr_os_t);
      }
      curves[a].add_row({t, spfs, sos, hos, hr_pfs_t, hr_os_t});
    }
    hazards.add_row(std::move(hz));
    survival.add_row(std::move(sv));
    os_hz.add_row(std::move(oh));
    ratios.add_row(std::move(hr));
  }
  hazards.write(out_dir / "panel_transition_hazards.csv");
  survival.write(out_dir / "panel_survival.csv");
  os_hz.write(out_dir / "panel_os_hazard.csv");
  ratios.write(out_dir / "panel_hazard_ratios.csv");
  files.insert(files.end(), {"panel_transition_hazards.csv", "panel_survival.csv",
                             "panel_os_hazard.csv", "panel_hazard_ratios.csv"});
  for (std::size_t a = 0; a < sc.arms.size(); ++a) {
    const std::string name = "curves_" + sc.arms[a].label + ".csv";
    curves[a].write(out_dir / name);
    files.push_back(name);
  }
  return files;
}

std::vector<std::string> write_trials(const Scenario& scenario, std::size_t n_patients,
                                      const McOptions& mc, const fs::path& out_dir) {
  std::vector<std::string> files;
  for (std::size_t rep = 0; rep < mc.n_rep; ++rep) {
    const auto records = simulate_trial(scenario, n_patients, mc.seed, static_cast<std::uint32_t>(rep));
    CsvTable t({"id", "arm", "pfs_time", "pfs_event", "os_time", "os_event"});
    for (const auto& r : records) {
      t.add_row({cell(r.id + 1), scenario.arms[r.arm].label, r.pfs_time, cell(r.pfs_event),
                 r.os_time, cell(r.os_event)});
    }
    char name[32];
    std::snprintf(name, sizeof name, "trial_%05zu.csv", rep);
    t.write(out_dir / name);
    files.emplace_back(name);
  }
  return files;
}

std::vector<std::string> write_coprimary(const CoprimaryReport& rep, const fs::path& out_dir) {
  CsvTable table2({"scenario", "pfs_events_schoenfeld", "pfs_events_idm", "os_events_schoenfeld",
                   "os_events_idm", "alpha_pfs", "alpha_pfs_se", "alpha_os", "alpha_os_se",
                   "alpha_global", "alpha_global_se"});
  const SimSummary& n = rep.null_at_planned;
  table2.add_row(with_se({rep.scenario.name, cell(rep.planned.pfs_events), cell(rep.calibrated.pfs_events),
                          cell(rep.planned.os_events), cell(rep.calibrated.os_events)},
                         n.pfs, n.os, n.global));
  table2.write(out_dir / "table2.csv");

  CsvTable power({"design", "n_patients", "pfs_events", "os_events", "power_pfs", "power_pfs_se",
                  "power_os", "power_os_se", "power_joint", "power_joint_se", "pfs_shortfall",
                  "os_shortfall"});
  auto power_row = [&](const char* name, const TrialDesign& d, const SimSummary& s) {
    auto row = with_se({name, cell(d.n_patients), cell(d.pfs_events), cell(d.os_events)}, s.pfs,
                       s.os, s.joint);
    row.push_back(cell(s.pfs_shortfall));
    row.push_back(cell(s.os_shortfall));
    power.add_row(std::move(row));
  };
  power_row("schoenfeld", rep.planned, rep.power_at_planned);
  power_row("calibrated", rep.calibrated, rep.power_at_calibrated);
  power.write(out_dir / "power.csv");

  CsvTable trace({"endpoint", "step", "events", "power", "power_se"});
  add_trace(trace, "PFS", rep.pfs_calibration);
  add_trace(trace, "OS", rep.os_calibration);
  trace.write(out_dir / "calibration_trace.csv");

  ojson j;
  j["workflow"] = "coprimary";
  j["scenario"] = rep.scenario.name;
  j["planning_hr_pfs"] = rep.hr_pfs;
  j["planning_hr_os"] = rep.hr_os;
  j["target_power"] = rep.inputs.target_power;
  j["calibration_tolerance"] = rep.inputs.tolerance;
  j["step1"] = design_json(rep.planned);
  j["step2_null"] = summary_json(rep.null_at_planned);
  j["step3_power_schoenfeld"] = summary_json(rep.power_at_planned);
  j["step3_pfs_calibration"] = calibration_json(rep.pfs_calibration);
  j["step3_os_calibration"] = calibration_json(rep.os_calibration);
  j["step3_design"] = design_json(rep.calibrated);
  j["step3_power_calibrated"] = summary_json(rep.power_at_calibrated);
  write_text(out_dir / "report.json", j.dump(2) + "\n");
  return {"table2.csv", "power.csv", "calibration_trace.csv", "report.json"};
}

std::vector<std::string> write_group_sequential(const GroupSequentialReport& rep,
                                                const fs::path& out_dir) {
  CsvTable table3({"scenario", "pfs_events", "os_ia_planned", "os_fa_planned", "c1", "c2",
                   "interim_alpha_spent", "os_fa_idm", "os_ia_realized_mean", "alpha_pfs",
                   "alpha_pfs_se", "alpha_os_interim", "alpha_os_interim_se", "alpha_os",
                   "alpha_os_se", "alpha_global", "alpha_global_se"});
  const SimSummary& n = rep.null_at_planned;
  table3.add_row(with_se({rep.scenario.name, cell(rep.planned.pfs_events),
                          cell(rep.planned_interim_events), cell(rep.planned.os_events),
                          rep.boundaries.c1, rep.boundaries.c2, rep.boundaries.spent_interim,
                          cell(rep.calibrated.os_events),
                          rep.power_at_calibrated.os_interim_events.mean},
                         n.pfs, n.os_interim, n.os, n.global));
  table3.write(out_dir / "table3.csv");

  CsvTable alpha({"design", "os_events", "alpha_pfs", "alpha_pfs_se", "alpha_os_interim",
                  "alpha_os_interim_se", "alpha_os", "alpha_os_se", "alpha_global",
                  "alpha_global_se"});
  alpha.add_row(with_se({"planned", cell(rep.planned.os_events)}, rep.null_at_planned.pfs,
                        rep.null_at_planned.os_interim, rep.null_at_planned.os,
                        rep.null_at_planned.global));
  const SimSummary& nc = rep.null_at_calibrated;
  alpha.add_row(with_se({"calibrated", cell(rep.calibrated.os_events)}, nc.pfs, nc.os_interim, nc.os,
                        nc.global));
  alpha.write(out_dir / "alpha.csv");

  CsvTable power({"design", "n_patients", "pfs_events", "os_events", "os_ia_events_mean",
                  "os_ia_events_sd", "os_ia_events_min", "os_ia_events_max", "power_pfs",
                  "power_pfs_se", "power_os_interim", "power_os_interim_se", "power_os",
                  "power_os_se", "power_joint", "power_joint_se"});
  auto power_row = [&](const char* name, const TrialDesign& d, const SimSummary& s) {
    const auto& ia = s.os_interim_events;
    power.add_row(with_se({name, cell(d.n_patients), cell(d.pfs_events), cell(d.os_events), ia.mean,
                           ia.sd, cell(ia.min), cell(ia.max)},
                          s.pfs, s.os_interim, s.os, s.joint));
  };
  power_row("planned", rep.planned, rep.power_at_planned);
  power_row("calibrated", rep.calibrated, rep.power_at_calibrated);
  power.write(out_dir / "power.csv");

  CsvTable trace({"endpoint", "step", "events", "power", "power_se"});
  add_trace(trace, "OS", rep.os_calibration);
  trace.write(out_dir / "calibration_trace.csv");

  ojson j;
  j["workflow"] = "group_sequential";
  j["scenario"] = rep.scenario.name;
  j["planning_hr_pfs"] = rep.hr_pfs;
  j["planning_hr_os"] = rep.hr_os;
  j["target_power"] = rep.inputs.target_power;
  j["calibration_tolerance"] = rep.inputs.tolerance;
  j["os_fixed_design_events"] = rep.os_fixed_events;
  j["inflation_factor"] = rep.inflation;
  j["planned_information_fraction"] = rep.planned_fraction;
  j["planned_interim_events"] = rep.planned_interim_events;
  j["boundaries"] = {{"c1", rep.boundaries.c1},
                     {"c2", rep.boundaries.c2},
                     {"interim_alpha_spent", rep.boundaries.spent_interim}};
  j["boundaries_policy"] = "frozen at planning values in all simulation steps";
  j["step1"] = design_json(rep.planned);
  j["step2_null"] = summary_json(rep.null_at_planned);
  j["step3_power_planned"] = summary_json(rep.power_at_planned);
  j["step3_os_calibration"] = calibration_json(rep.os_calibration);
  j["step3_design"] = design_json(rep.calibrated);
  j["step3_null_calibrated"] = summary_json(rep.null_at_calibrated);
  j["step3_power_calibrated"] = summary_json(rep.power_at_calibrated);
  write_text(out_dir / "report.json", j.dump(2) + "\n");
  return {"table3.csv", "alpha.csv", "power.csv", "calibration_trace.csv", "report.json"};
}

std::vector<std::string> write_estimates(const IngestedEndpoints& data, const EstimateConfig& cfg,
                                         const fs::path& out_dir) {
  std::vector<std::string> arms;
  std::map<std::string, std::vector<MsmRecord>> by_arm;
  std::map<std::string, std::vector<const EndpointRow*>> rows_by_arm;
  for (const auto& r : data.records) {
    if (!by_arm.count(r.arm)) arms.push_back(r.arm);
    by_arm[r.arm].push_back(r);
  }
  std::map<std::string, bool> valid_id;
  for (const auto& r : data.records) valid_id[r.id + "\x1f" + r.arm] = true;
  for (const auto& row : data.rows) {
    if (valid_id.count(row.id + "\x1f" + row.arm)) rows_by_arm[row.arm].push_back(&row);
  }

  CsvTable km({"arm", "endpoint", "time", "survival"});
  CsvTable na({"arm", "transition", "time", "cumulative_hazard"});
  CsvTable aj({"arm", "time", "p00", "p01", "p02", "p11", "p12"});
  const std::vector<std::pair<int, int>> transitions = {{0, 1}, {0, 2}, {1, 2}};
  std::map<std::string, std::vector<StepFunction>> cumhaz;
  for (const auto& arm : arms) {
    const auto& rows = rows_by_arm[arm];
    for (const char* endpoint : {"PFS", "OS"}) {
      const bool pfs = std::string(endpoint) == "PFS";
      std::vector<double> times;
      std::vector<char> ev;
      for (const auto* r : rows) {
        times.push_back(pfs ? r->pfs_time : r->os_time);
        ev.push_back(pfs ? r->pfs_event : r->os_event);
      }
      std::unique_ptr<bool[]> events(new bool[ev.size()]);
      for (std::size_t i = 0; i < ev.size(); ++i) events[i] = ev[i];
      const StepFunction s = kaplan_meier(times, std::span<const bool>(events.get(), ev.size()));
      for (Eigen::Index i = 0; i < s.times.size(); ++i) km.add_row({arm, endpoint, s.times[i], s.values[i]});
    }
    for (const auto& [from, to] : transitions) {
      const StepFunction a = nelson_aalen(by_arm[arm], from, to, cfg.min_at_risk);
      for (Eigen::Index i = 0; i < a.times.size(); ++i) {
        na.add_row({arm, transition_name(from, to), a.times[i], a.values[i]});
      }
      cumhaz[arm].push_back(a);
    }
    const AalenJohansenPath path = aalen_johansen_path(by_arm[arm], 0.0);
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      const auto& p = path.matrices[i];
      aj.add_row({arm, path.times[i], p(0, 0), p(0, 1), p(0, 2), p(1, 1), p(1, 2)});
    }
  }
  km.write(out_dir / "kaplan_meier.csv");
  na.write(out_dir / "nelson_aalen.csv");
  aj.write(out_dir / "aalen_johansen.csv");
  std::vector<std::string> files = {"kaplan_meier.csv", "nelson_aalen.csv", "aalen_johansen.csv"};

  if (arms.size() >= 2) {
    CsvTable ph({"transition", "time", "cumulative_hazard_" + arms[0], "cumulative_hazard_" + arms[1]});
    for (std::size_t k = 0; k < transitions.size(); ++k) {
      for (const auto& [t, v] : paired_cumulative(cumhaz[arms[0]][k], cumhaz[arms[1]][k])) {
        ph.add_row({transition_name(transitions[k].first, transitions[k].second), t, v[0], v[1]});
      }
    }
    ph.write(out_dir / "ph_diagnostic.csv");
    files.push_back("ph_diagnostic.csv");
  }

  const std::vector<std::pair<const std::optional<std::vector<double>>*, std::pair<int, int>>> fits = {
      {&cfg.breaks_01, {0, 1}}, {&cfg.breaks_02, {0, 2}}, {&cfg.breaks_12, {1, 2}}};
  CsvTable pw({"arm", "transition", "start", "end", "events", "exposure", "rate", "zero_exposure"});
  for (const auto& arm : arms) {
    for (const auto& [breaks, tr] : fits) {
      if (!*breaks) continue;
      const PiecewiseFit f = fit_piecewise_exponential(by_arm[arm], tr.first, tr.second, **breaks);
      for (std::size_t i = 0; i < f.breaks.size(); ++i) {
        const CsvTable::Cell end = i + 1 < f.breaks.size() ? CsvTable::Cell(f.breaks[i + 1])
                                                          : CsvTable::Cell(std::monostate{});
        pw.add_row({arm, transition_name(tr.first, tr.second), f.breaks[i], end, f.events[i],
                    f.exposure[i], f.rates[i], cell(f.zero_exposure[i] ? 1 : 0)});
      }
    }
  }
  if (pw.rows() > 0) {
    pw.write(out_dir / "piecewise_fit.csv");
    files.push_back("piecewise_fit.csv");
  }

  CsvTable rejected({"line", "reason"});
  for (const auto& [line, reason] : data.rejected) rejected.add_row({cell(line), reason});
  rejected.write(out_dir / "rejected_rows.csv");
  files.push_back("rejected_rows.csv");
  return files;
}

}  // namespace trialmsm
