#include "trialmsm/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace trialmsm {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, message); }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : value_.items()) {
      if (!keys.count(key)) throw ConfigError(join(key), "unknown key");
    }
  }

  bool has(const char* key) const { return value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.contains(key)) throw ConfigError(join(key), "missing required key");
    return {value_.at(key), join(key)};
  }

  std::vector<Node> elements() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_.at(i), path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }

  double non_negative() const {
    const double v = number();
    if (!(v >= 0.0)) fail("must be >= 0");
    return v;
  }

  double probability() const {
    const double v = number();
    if (!(v > 0.0 && v < 1.0)) fail("must lie in (0, 1)");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
    if (value_.is_number_integer() && value_.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(value_.get<std::int64_t>());
    }
    fail("expected a non-negative integer");
  }

  std::size_t count(std::size_t minimum) const {
    const auto v = unsigned_integer();
    if (v < minimum) fail("must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(v);
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& e : elements()) out.push_back(e.number());
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

HazardSpec parse_hazard(const Node& n) {
  n.expect_object({"type", "rate", "breaks", "rates", "shape", "scale", "clock", "inner"});
  const std::string type = n.at("type").string();
  try {
    if (type == "constant") {
      n.expect_object({"type", "rate"});
      return HazardSpec::constant(n.at("rate").non_negative());
    }
    if (type == "piecewise") {
      n.expect_object({"type", "breaks", "rates"});
      const auto rates_node = n.at("rates");
      auto rates = rates_node.numbers();
      for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] >= 0.0)) throw ConfigError(rates_node.path() + "[" + std::to_string(i) + "]", "must be >= 0");
      }
      return HazardSpec::piecewise(n.at("breaks").numbers(), std::move(rates));
    }
    if (type == "weibull") {
      n.expect_object({"type", "shape", "scale"});
      return HazardSpec::weibull(n.at("shape").positive(), n.at("scale").positive());
    }
    if (type == "entry_shifted") {
      n.expect_object({"type", "clock", "inner"});
      const std::string clock = n.at("clock").string();
      ClockMode mode;
      if (clock == "reset") {
        mode = ClockMode::clock_reset;
      } else if (clock == "forward") {
        mode = ClockMode::clock_forward;
      } else {
        n.at("clock").fail("expected \"reset\" or \"forward\"");
      }
      return HazardSpec::entry_shifted(parse_hazard(n.at("inner")), mode);
    }
  } catch (const InvalidHazard& e) {
    n.fail(e.what());
  }
  n.at("type").fail("unknown hazard type '" + type + "'");
}

ojson render_hazard(const HazardSpec& h) {
  ojson out;
  if (h.needs_entry()) {
    out["type"] = "entry_shifted";
    out["clock"] = h.clock_mode() == ClockMode::clock_reset ? "reset" : "forward";
    out["inner"] = render_hazard(h.inner());
    return out;
  }
  if (const auto* c = std::get_if<ConstantHazard>(&h.base())) {
    out["type"] = "constant";
    out["rate"] = c->rate;
  } else if (const auto* p = std::get_if<PiecewiseHazard>(&h.base())) {
    out["type"] = "piecewise";
    out["breaks"] = p->breaks;
    out["rates"] = p->rates;
  } else if (const auto* w = std::get_if<WeibullHazard>(&h.base())) {
    out["type"] = "weibull";
    out["shape"] = w->shape;
    out["scale"] = w->scale;
  }
  return out;
}

Accrual parse_accrual(const Node& n) {
  n.expect_object({"type", "duration"});
  const std::string type = n.at("type").string();
  if (type == "instantaneous") {
    n.expect_object({"type"});
    return Accrual::instantaneous();
  }
  if (type == "uniform") return Accrual::uniform(n.at("duration").positive());
  n.at("type").fail("expected \"instantaneous\" or \"uniform\"");
}

ojson render_accrual(const Accrual& a) {
  ojson out;
  if (a.kind == Accrual::Kind::instantaneous) {
    out["type"] = "instantaneous";
  } else {
    out["type"] = "uniform";
    out["duration"] = a.duration;
  }
  return out;
}

TrialArm parse_arm(const Node& n) {
  n.expect_object({"label", "allocation", "hazards"});
  TrialArm arm{n.at("label").string(), ArmHazards::constant(0, 0, 0), 1.0};
  if (arm.label.empty()) n.at("label").fail("must not be empty");
  if (n.has("allocation")) arm.allocation = n.at("allocation").positive();
  const Node h = n.at("hazards");
  h.expect_object({"h01", "h02", "h12"});
  const HazardSpec h01 = parse_hazard(h.at("h01"));
  const HazardSpec h02 = parse_hazard(h.at("h02"));
  const HazardSpec h12 = parse_hazard(h.at("h12"));
  if (h01.needs_entry()) h.at("h01").fail("entry-shifted hazards are only legal for h12");
  if (h02.needs_entry()) h.at("h02").fail("entry-shifted hazards are only legal for h12");
  arm.hazards = ArmHazards(h01, h02, h12);
  return arm;
}

void parse_scenario(const Node& n, ConfigDocument& doc) {
  n.expect_object({"name", "arms", "control", "censoring", "accrual", "n_patients"});
  Scenario& sc = doc.scenario;
  sc.name = n.has("name") ? n.at("name").string() : "";
  const Node arms = n.at("arms");
  for (const auto& a : arms.elements()) sc.arms.push_back(parse_arm(a));
  if (sc.arms.size() < 2) arms.fail("need at least two arms");
  std::set<std::string> labels;
  for (const auto& a : sc.arms) {
    if (!labels.insert(a.label).second) arms.fail("duplicate arm label '" + a.label + "'");
  }
  const Node control = n.at("control");
  const std::string label = control.string();
  const auto it = std::find_if(sc.arms.begin(), sc.arms.end(), [&](const auto& a) { return a.label == label; });
  if (it == sc.arms.end()) control.fail("no arm labelled '" + label + "'");
  sc.control = static_cast<std::size_t>(it - sc.arms.begin());

  if (n.has("censoring")) {
    const Node c = n.at("censoring");
    if (c.has("probability") || c.has("horizon")) {
      c.expect_object({"probability", "horizon"});
      CensoringShorthand s{c.at("probability").probability(), c.at("horizon").positive()};
      doc.censoring_shorthand = s;
      sc.censoring = HazardSpec::constant(s.rate());
    } else {
      sc.censoring = parse_hazard(c);
      if (sc.censoring.needs_entry()) c.fail("censoring hazard cannot be entry-shifted");
    }
  } else {
    sc.censoring = HazardSpec::constant(0.0);
    doc.warnings.push_back("scenario.censoring missing; using censoring rate 0");
  }
  sc.accrual = n.has("accrual") ? parse_accrual(n.at("accrual")) : Accrual::instantaneous();
  if (n.has("n_patients")) doc.n_patients = n.at("n_patients").count(2);
}

DesignOverrides parse_overrides(const Node& n, bool group_sequential) {
  if (group_sequential) {
    n.expect_object({"accrual", "n_patients", "interim_fraction"});
  } else {
    n.expect_object({"accrual", "n_patients"});
  }
  DesignOverrides o;
  if (n.has("accrual")) o.accrual = parse_accrual(n.at("accrual"));
  if (n.has("n_patients")) o.n_patients = n.at("n_patients").count(2);
  if (n.has("interim_fraction")) {
    const Node f = n.at("interim_fraction");
    const double v = f.number();
    if (!(v > 0.0 && v <= 1.0)) f.fail("must lie in (0, 1]");
    o.interim_fraction = v;
  }
  return o;
}

ojson render_overrides(const DesignOverrides& o) {
  ojson out = ojson::object();
  if (o.accrual) out["accrual"] = render_accrual(*o.accrual);
  if (o.n_patients) out["n_patients"] = *o.n_patients;
  if (o.interim_fraction) out["interim_fraction"] = *o.interim_fraction;
  return out;
}

void parse_design(const Node& n, DesignConfig& d) {
  n.expect_object({"global_alpha", "alpha_pfs", "alpha_os", "target_power", "calibration_tolerance",
                   "hr_pfs", "hr_os", "ahr_horizon", "enrolment_factor", "fraction_horizon",
                   "coprimary", "group_sequential"});
  if (n.has("global_alpha")) d.global_alpha = n.at("global_alpha").probability();
  if (n.has("alpha_pfs")) d.alpha_pfs = n.at("alpha_pfs").probability();
  if (n.has("alpha_os")) d.alpha_os = n.at("alpha_os").probability();
  if (std::abs(d.alpha_pfs + d.alpha_os - d.global_alpha) > 1e-12) {
    n.fail("alpha_pfs + alpha_os must equal global_alpha");
  }
  if (n.has("target_power")) d.target_power = n.at("target_power").probability();
  if (n.has("calibration_tolerance")) {
    const Node t = n.at("calibration_tolerance");
    d.calibration_tolerance = t.non_negative();
    if (d.calibration_tolerance >= d.target_power) t.fail("must be below target_power");
  }
  for (const char* key : {"hr_pfs", "hr_os"}) {
    if (!n.has(key)) continue;
    const Node h = n.at(key);
    const double v = h.positive();
    if (v == 1.0) h.fail("must differ from 1");
    (std::string(key) == "hr_pfs" ? d.hr_pfs : d.hr_os) = v;
  }
  if (n.has("ahr_horizon")) d.ahr_horizon = n.at("ahr_horizon").positive();
  if (n.has("enrolment_factor")) d.enrolment_factor = n.at("enrolment_factor").positive();
  if (n.has("fraction_horizon")) d.fraction_horizon = n.at("fraction_horizon").positive();
  if (n.has("coprimary")) d.coprimary = parse_overrides(n.at("coprimary"), false);
  if (n.has("group_sequential")) d.group_sequential = parse_overrides(n.at("group_sequential"), true);
}

void parse_run(const Node& n, RunConfig& r) {
  n.expect_object({"n_rep", "seed", "threads", "out_dir"});
  if (n.has("n_rep")) r.n_rep = n.at("n_rep").count(1);
  if (n.has("seed")) r.seed = n.at("seed").unsigned_integer();
  if (n.has("threads")) r.threads = static_cast<unsigned>(n.at("threads").count(1));
  if (n.has("out_dir")) r.out_dir = n.at("out_dir").string();
}

void parse_analytic(const Node& n, AnalyticConfig& a) {
  n.expect_object({"horizon", "points"});
  if (n.has("horizon")) a.horizon = n.at("horizon").positive();
  if (n.has("points")) a.points = n.at("points").count(2);
}

std::vector<double> parse_breaks(const Node& n) {
  auto b = n.numbers();
  if (b.empty() || b.front() != 0.0) n.fail("breaks must start at 0");
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1])) n.fail("breaks must be strictly increasing");
  }
  return b;
}

void parse_estimate(const Node& n, EstimateConfig& e) {
  n.expect_object({"min_at_risk", "piecewise_breaks"});
  if (n.has("min_at_risk")) e.min_at_risk = n.at("min_at_risk").count(1);
  if (n.has("piecewise_breaks")) {
    const Node b = n.at("piecewise_breaks");
    b.expect_object({"h01", "h02", "h12"});
    if (b.has("h01")) e.breaks_01 = parse_breaks(b.at("h01"));
    if (b.has("h02")) e.breaks_02 = parse_breaks(b.at("h02"));
    if (b.has("h12")) e.breaks_12 = parse_breaks(b.at("h12"));
  }
}

}  // namespace

double CensoringShorthand::rate() const { return -std::log1p(-probability) / horizon; }

Scenario ConfigDocument::scenario_for(const DesignOverrides& o) const {
  Scenario sc = scenario;
  if (o.accrual) sc.accrual = *o.accrual;
  return sc;
}

WorkflowInputs ConfigDocument::inputs_for(const DesignOverrides& o) const {
  WorkflowInputs in;
  in.global_alpha = design.global_alpha;
  in.alpha_pfs = design.alpha_pfs;
  in.alpha_os = design.alpha_os;
  in.target_power = design.target_power;
  in.tolerance = design.calibration_tolerance;
  in.hr_pfs = design.hr_pfs;
  in.hr_os = design.hr_os;
  in.ahr_horizon = design.ahr_horizon;
  in.enrolment_factor = design.enrolment_factor;
  in.fraction_horizon = design.fraction_horizon;
  in.n_patients = o.n_patients ? o.n_patients : n_patients;
  in.interim_fraction = o.interim_fraction;
  return in;
}

ConfigDocument parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  const Node n(root, "");
  if (!root.is_object()) throw ConfigError("<document>", "expected an object");
  n.expect_object({"scenario", "design", "run", "analytic", "estimate"});
  ConfigDocument doc;
  parse_scenario(n.at("scenario"), doc);
  if (n.has("design")) parse_design(n.at("design"), doc.design);
  if (n.has("run")) parse_run(n.at("run"), doc.run);
  if (n.has("analytic")) parse_analytic(n.at("analytic"), doc.analytic);
  if (n.has("estimate")) parse_estimate(n.at("estimate"), doc.estimate);
  return doc;
}

std::string render_config(const ConfigDocument& doc) {
  ojson root;
  const Scenario& sc = doc.scenario;
  ojson& s = root["scenario"];
  s["name"] = sc.name;
  s["arms"] = ojson::array();
  for (const auto& a : sc.arms) {
    ojson arm;
    arm["label"] = a.label;
    arm["allocation"] = a.allocation;
    arm["hazards"]["h01"] = render_hazard(a.hazards.h01);
    arm["hazards"]["h02"] = render_hazard(a.hazards.h02);
    arm["hazards"]["h12"] = render_hazard(a.hazards.h12);
    s["arms"].push_back(arm);
  }
  s["control"] = sc.arms.at(sc.control).label;
  if (doc.censoring_shorthand) {
    s["censoring"]["probability"] = doc.censoring_shorthand->probability;
    s["censoring"]["horizon"] = doc.censoring_shorthand->horizon;
  } else {
    s["censoring"] = render_hazard(sc.censoring);
  }
  s["accrual"] = render_accrual(sc.accrual);
  if (doc.n_patients) s["n_patients"] = *doc.n_patients;

  const DesignConfig& d = doc.design;
  ojson& dj = root["design"];
  dj["global_alpha"] = d.global_alpha;
  dj["alpha_pfs"] = d.alpha_pfs;
  dj["alpha_os"] = d.alpha_os;
  dj["target_power"] = d.target_power;
  dj["calibration_tolerance"] = d.calibration_tolerance;
  if (d.hr_pfs) dj["hr_pfs"] = *d.hr_pfs;
  if (d.hr_os) dj["hr_os"] = *d.hr_os;
  dj["ahr_horizon"] = d.ahr_horizon;
  dj["enrolment_factor"] = d.enrolment_factor;
  dj["fraction_horizon"] = d.fraction_horizon;
  dj["coprimary"] = render_overrides(d.coprimary);
  dj["group_sequential"] = render_overrides(d.group_sequential);

  ojson& r = root["run"];
  r["n_rep"] = doc.run.n_rep;
  r["seed"] = doc.run.seed;
  r["threads"] = doc.run.threads;
  r["out_dir"] = doc.run.out_dir;

  root["analytic"]["horizon"] = doc.analytic.horizon;
  root["analytic"]["points"] = doc.analytic.points;

  ojson& e = root["estimate"];
  e["min_at_risk"] = doc.estimate.min_at_risk;
  ojson breaks = ojson::object();
  if (doc.estimate.breaks_01) breaks["h01"] = *doc.estimate.breaks_01;
  if (doc.estimate.breaks_02) breaks["h02"] = *doc.estimate.breaks_02;
  if (doc.estimate.breaks_12) breaks["h12"] = *doc.estimate.breaks_12;
  e["piecewise_breaks"] = breaks;
  return root.dump(2) + "\n";
}

}  // namespace trialmsm
