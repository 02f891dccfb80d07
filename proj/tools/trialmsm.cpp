#include "trialmsm/config.hpp"
#include "trialmsm/design.hpp"
#include "trialmsm/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef TRIALMSM_VERSION
#define TRIALMSM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace trialmsm;

namespace {

constexpr int kExitError = 1;
constexpr int kExitWarning = 2;
constexpr int kExitUsage = 64;

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::string data;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<unsigned> threads;
};

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_json(const fs::path& p, const ojson& j) {
  std::ofstream f(p, std::ios::binary);
  f << j.dump(2) << "\n";
}

void write_error(const fs::path& out, const Options& opt, const std::string& kind,
                 const std::string& message, const std::string& path = "") {
  ojson e;
  e["status"] = "error";
  e["command"] = opt.command;
  e["kind"] = kind;
  if (!path.empty()) e["path"] = path;
  e["message"] = message;
  std::cerr << "trialmsm: " << message << "\n";
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) write_json(out / "error.json", e);
}

int run(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  ConfigDocument doc = parse_config(read_file(opt.config));
  if (opt.seed) doc.run.seed = *opt.seed;
  if (opt.reps) doc.run.n_rep = *opt.reps;
  if (opt.threads) doc.run.threads = *opt.threads;
  if (!opt.out.empty()) doc.run.out_dir = opt.out;
  if (doc.run.n_rep == 0) throw ConfigError("run.n_rep", "must be >= 1");
  if (doc.run.threads == 0) throw ConfigError("run.threads", "must be >= 1");

  const fs::path out = doc.run.out_dir;
  fs::create_directories(out);
  const McOptions mc{doc.run.n_rep, doc.run.seed, doc.run.threads};
  std::vector<std::string> warnings = doc.warnings;
  std::vector<std::string> outputs;
  int status = 0;

  if (opt.command == "analytic") {
    outputs = write_analytic(doc, out);
  } else if (opt.command == "simulate") {
    const std::size_t n =
        doc.n_patients ? *doc.n_patients
                       : plan_coprimary(doc.scenario, doc.inputs_for(doc.design.coprimary)).n_patients;
    outputs = write_trials(doc.scenario, n, mc, out);
  } else if (opt.command == "design-coprimary") {
    const auto& o = doc.design.coprimary;
    const auto rep = run_coprimary_workflow(doc.scenario_for(o), doc.inputs_for(o), mc);
    outputs = write_coprimary(rep, out);
  } else if (opt.command == "design-gs") {
    const auto& o = doc.design.group_sequential;
    const auto rep = run_group_sequential_workflow(doc.scenario_for(o), doc.inputs_for(o), mc);
    outputs = write_group_sequential(rep, out);
  } else if (opt.command == "estimate") {
    if (opt.data.empty()) throw CLI::RequiredError("--data");
    const auto data = ingest_endpoints(fs::path(opt.data));
    outputs = write_estimates(data, doc.estimate, out);
    for (const auto& [line, reason] : data.rejected) {
      warnings.push_back("line " + std::to_string(line) + ": " + reason);
    }
    if (!data.rejected.empty()) status = kExitWarning;
  }
  for (const auto& w : warnings) std::cerr << "trialmsm: warning: " << w << "\n";

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ojson m;
  m["command"] = opt.command;
  m["version"] = TRIALMSM_VERSION;
  m["status"] = status == 0 ? "ok" : "warning";
  m["seed"] = doc.run.seed;
  m["n_rep"] = doc.run.n_rep;
  m["threads"] = doc.run.threads;
  m["wall_time_seconds"] = wall;
  m["config_path"] = opt.config;
  if (!opt.data.empty()) m["data_path"] = opt.data;
  m["config"] = ojson::parse(render_config(doc));
  m["outputs"] = outputs;
  m["warnings"] = warnings;
  write_json(out / "manifest.json", m);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Illness-death model trial design engine"};
  app.set_version_flag("--version", TRIALMSM_VERSION);
  app.require_subcommand(1, 1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"analytic", "closed-form hazards, survival curves and hazard ratios"},
      {"simulate", "simulate trial datasets"},
      {"design-coprimary", "co-primary PFS/OS design: Schoenfeld counts, alpha, power, calibration"},
      {"design-gs", "PFS plus two-look OS group-sequential design"},
      {"estimate", "nonparametric and piecewise-exponential estimates from endpoint data"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "config file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (default: run.out_dir)");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--reps", opt.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    if (name == "estimate") {
      sub->add_option("--data", opt.data, "endpoint CSV")->required()->check(CLI::ExistingFile);
    }
    sub->callback([&opt, name = name] { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const fs::path out = opt.out.empty() ? fs::path("out") : fs::path(opt.out);
  try {
    return run(opt);
  } catch (const ConfigError& e) {
    write_error(out, opt, "config", e.what(), e.path());
  } catch (const std::invalid_argument& e) {
    write_error(out, opt, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    write_error(out, opt, "runtime", e.what());
  }
  return kExitError;
}
