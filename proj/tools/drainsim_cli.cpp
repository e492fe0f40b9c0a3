// drainsim: command-line front end for the drain-simulation library.
//
// Subcommands: simulate, calibrate, check, rank, reproduce. All
// configuration comes in through flags and files (no environment
// variables), every output is produced with the library's bit-stable
// formatters, and the default seed is 0 — identical inputs give identical
// bytes.
//
// Exit codes: 0 success / feasible plan; 1 usage or parse error;
// 2 infeasible plan; 3 model or calibration error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "drainsim/drainsim.hpp"

namespace {

using namespace drainsim;

// Command-layer failures that are the caller's to fix (bad paths, bad
// flag combinations). Mapped to exit code 1 alongside parse errors.
class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw UsageError("failed writing '" + path + "'");
}

ComponentRegistry load_registry(const std::string& path) {
  if (path.empty()) return reference::registry();
  return parse_registry(read_file(path));
}

PowerModel load_model(const std::string& path) {
  if (path.empty()) return reference::power_model();
  return parse_power_model(read_file(path));
}

DeviceProfile load_profile(const std::string& path) {
  return parse_device_profile(read_file(path));
}

AttackPlan load_plan(const std::string& path, const ComponentRegistry& reg) {
  const PlanParseResult r = parse_plan(read_file(path), reg);
  if (!r.ok()) {
    throw ParseError("plan '" + path + "' is not usable", r.violations);
  }
  return *r.plan;
}

std::string fd(double v) { return detail::format_double(v); }

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string plan, profile, model, registry, out;
  std::string mode = "deterministic";
  std::string format = "csv";
  std::uint64_t seed = 0;
  double step = 1.0;
  int trials = 1;
  bool force = false;
};

int run_simulate(const SimulateArgs& a) {
  const ComponentRegistry reg = load_registry(a.registry);
  const PowerModel model = load_model(a.model);
  const DeviceProfile profile = load_profile(a.profile);
  const AttackPlan plan = load_plan(a.plan, reg);

  SimulationOptions opts;
  opts.mode = a.mode == "stochastic" ? SimulationMode::stochastic
                                     : SimulationMode::deterministic;
  opts.seed = a.seed;
  opts.step_seconds = a.step;
  opts.force = a.force;

  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  if (a.trials > 1 && !a.out.empty()) {
    throw UsageError("--out writes one trace; drop it or use --trials 1");
  }

  if (a.trials == 1) {
    const SimulationTrace trace = simulate(plan, profile, model, reg, opts);
    std::cout << "terminal: " << to_string(trace.terminal) << "\n"
              << "elapsed_minutes: " << fd(trace.elapsed_minutes()) << "\n"
              << "initial_level: " << fd(trace.initial_level()) << "\n"
              << "final_level: " << fd(trace.final_level()) << "\n"
              << "drained_pct: "
              << fd(trace.initial_level() - trace.final_level()) << "\n"
              << "samples: " << trace.samples.size() << "\n";
    if (!a.out.empty()) {
      write_file(a.out, a.format == "json" ? to_json(trace).dump(2) + "\n"
                                           : trace_to_csv(trace));
      std::cout << "trace written to " << a.out << "\n";
    }
    return 0;
  }

  // Repeated stochastic runs: one summary line per trial (seeded seed+i),
  // then aggregate minutes over the whole-run times.
  std::vector<double> minutes;
  for (int i = 0; i < a.trials; ++i) {
    SimulationOptions t = opts;
    t.mode = SimulationMode::stochastic;
    t.seed = a.seed + static_cast<std::uint64_t>(i);
    const SimulationTrace trace = simulate(plan, profile, model, reg, t);
    minutes.push_back(trace.elapsed_minutes());
    std::cout << "trial " << i << ": terminal=" << to_string(trace.terminal)
              << " elapsed_minutes=" << fd(trace.elapsed_minutes())
              << " final_level=" << fd(trace.final_level()) << "\n";
  }
  double sum = 0.0, mx = minutes.front(), mn = minutes.front();
  for (double m : minutes) {
    sum += m;
    mx = std::max(mx, m);
    mn = std::min(mn, m);
  }
  const double avg = sum / static_cast<double>(minutes.size());
  double ss = 0.0;
  for (double m : minutes) ss += (m - avg) * (m - avg);
  const double sd = minutes.size() > 1
                        ? std::sqrt(ss / double(minutes.size() - 1))
                        : 0.0;
  std::cout << "trials: " << a.trials << "\n"
            << "avg_minutes: " << fd(avg) << "\n"
            << "sd_minutes: " << fd(sd) << "\n"
            << "max_minutes: " << fd(mx) << "\n"
            << "min_minutes: " << fd(mn) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  std::string measurements, out, registry_out;
  std::string fit_interference, fit_dim, fit_charging;
};

const MeasurementRecord& find_record(
    const std::vector<MeasurementRecord>& records, const std::string& id,
    MeasurementContext context) {
  for (const auto& r : records) {
    if (r.component_id == id && r.context == context) return r;
  }
  throw CalibrationError("no " + to_string(context) + " row for '" + id +
                         "' in the measurements table");
}

int run_calibrate(const CalibrateArgs& a) {
  const std::vector<MeasurementRecord> records =
      parse_measurements_csv(read_file(a.measurements));
  ComponentRegistry reg = calibrate_components(records);
  PowerModel model;

  if (!a.fit_interference.empty()) {
    const InterferenceFit fit = fit_interference(
        find_record(records, a.fit_interference,
                    MeasurementContext::unplugged),
        reg, model);
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "interference_eta: " << fd(fit.eta) << " ("
              << fit.set_key << ")\n";
  }
  if (!a.fit_charging.empty()) {
    const double supply = fit_charging_supply(
        find_record(records, a.fit_charging, MeasurementContext::unplugged),
        find_record(records, a.fit_charging, MeasurementContext::charging),
        model);
    std::cout << "charging_supply: " << fd(supply) << "\n";
  }
  if (!a.fit_dim.empty()) {
    // Calibrated components carry no device flags; the dim fit is what
    // declares this one display-class.
    if (!reg.contains(a.fit_dim)) {
      throw CalibrationError("dim fit references unknown component '" +
                             a.fit_dim + "'");
    }
    ComponentSpec c = reg.at(a.fit_dim);
    c.display_class = true;
    reg.add(c);
    const MeasurementRecord& row =
        find_record(records, a.fit_dim, MeasurementContext::unplugged);
    if (!row.full_drain_minutes) {
      throw CalibrationError("dim fit: row '" + a.fit_dim +
                             "' has no full_drain column");
    }
    const double phi =
        fit_dim_factor(*row.full_drain_minutes, a.fit_dim, reg, model);
    std::cout << "dim_factor_phi: " << fd(phi) << "\n";
  }

  write_file(a.out, to_json(model).dump(2) + "\n");
  std::cout << "model written to " << a.out << "\n";
  if (!a.registry_out.empty()) {
    write_file(a.registry_out, to_json(reg).dump(2) + "\n");
    std::cout << "registry written to " << a.registry_out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// check

int run_check(const std::string& plan_path, const std::string& profile_path,
              const std::string& registry_path) {
  const ComponentRegistry reg = load_registry(registry_path);
  const DeviceProfile profile = load_profile(profile_path);
  const AttackPlan plan = load_plan(plan_path, reg);

  const FeasibilityReport r = check_feasibility(plan, profile, reg);
  for (const auto& v : r.verdicts) {
    std::cout << "component " << v.component_id << ": "
              << (v.ok ? "ok" : "BLOCKED") << "\n";
    for (const auto& reason : v.reasons) {
      std::cout << "  - " << reason << "\n";
    }
  }
  if (r.feasible) {
    std::cout << "plan: feasible\n";
    return 0;
  }
  std::cout << "plan: INFEASIBLE\n";
  auto list = [](const char* what, const std::set<std::string>& s) {
    if (s.empty()) return;
    std::cout << what << ":";
    for (const auto& e : s) std::cout << ' ' << e;
    std::cout << "\n";
  };
  list("missing permissions", r.missing_permissions);
  list("missing settings", r.missing_settings);
  list("web-blocked components", r.web_blocked);
  return 2;
}

// ---------------------------------------------------------------------------
// rank

int run_rank(const std::string& plans_dir, const std::string& profile_path,
             const std::string& model_path,
             const std::string& registry_path) {
  const ComponentRegistry reg = load_registry(registry_path);
  const PowerModel model = load_model(model_path);
  const DeviceProfile profile = load_profile(profile_path);

  namespace fs = std::filesystem;
  if (!fs::is_directory(plans_dir)) {
    throw UsageError("--plans '" + plans_dir + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(plans_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());  // directory order is unspecified
  if (files.empty()) {
    throw UsageError("no .json plan files in '" + plans_dir + "'");
  }
  std::vector<std::pair<std::string, AttackPlan>> plans;
  for (const auto& f : files) {
    plans.emplace_back(f.stem().string(), load_plan(f.string(), reg));
  }

  const std::vector<RankedPlan> ranked = rank_plans(plans, profile, model, reg);
  auto col = [](std::string s, std::size_t w) {
    if (s.size() < w) s.resize(w, ' ');
    return s + ' ';
  };
  std::cout << col("rank", 4) << col("name", 24) << col("feasible", 8)
            << col("efficacy", 12) << col("drained_pct", 11)
            << col("minutes", 10) << col("stealth", 7) << "terminal\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const RankedPlan& r = ranked[i];
    std::cout << col(std::to_string(i + 1), 4) << col(r.name, 24)
              << col(r.feasible ? "yes" : "no", 8)
              << col(fd(r.efficacy), 12) << col(fd(r.drained_pct), 11)
              << col(fd(r.minutes), 10)
              << col(r.stealth ? std::to_string(*r.stealth) : "-", 7)
              << to_string(r.terminal) << "\n";
  }
  for (const auto& r : ranked) {
    for (const auto& reason : r.infeasibility_reasons) {
      std::cout << "note: " << r.name << ": " << reason << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce

int run_reproduce(const std::string& out_path) {
  const ComponentRegistry reg = reference::registry();
  const PowerModel model = reference::power_model();
  const ReproduceReport report = reproduce_reference(reg, model);
  std::cout << report.table();
  if (!out_path.empty()) {
    write_file(out_path, to_json(report).dump(2) + "\n");
    std::cout << "report written to " << out_path << "\n";
  }
  // The per-component rows are reproduced from the same dataset the rates
  // came from; a gap beyond one poll interval means the model is broken.
  for (const auto& row : report.rows) {
    if (row.label != "in_sample") continue;
    const double gap =
        std::abs(row.simulated_minutes - row.reference_minutes) * 60.0;
    if (gap > model.poll_interval + 1e-9) {
      std::cerr << "error: in-sample row '" << row.name << "' is off by "
                << fd(gap) << " s (more than one poll interval)\n";
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Discrete-time simulator of battery-exhaustion attacks on mobile "
      "devices, calibrated against a bundled reference dataset"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand(
      "simulate", "Run an attack plan against a device and power model");
  c_sim->add_option("--plan", sim.plan, "Attack plan JSON file")->required();
  c_sim->add_option("--profile", sim.profile, "Device profile JSON file")
      ->required();
  c_sim->add_option("--model", sim.model, "Power model JSON file")->required();
  c_sim->add_option("--registry", sim.registry,
                    "Component registry JSON file (default: bundled "
                    "reference registry)");
  c_sim->add_option("--seed", sim.seed,
                    "Random seed for stochastic mode (default 0)");
  c_sim->add_option("--mode", sim.mode,
                    "deterministic (rates at their means) or stochastic "
                    "(per-trial drain-time draws)")
      ->check(CLI::IsMember({"deterministic", "stochastic"}));
  c_sim->add_option("--step", sim.step,
                    "Integration step in simulated seconds (default 1)")
      ->check(CLI::PositiveNumber);
  c_sim->add_option("--trials", sim.trials,
                    "Run this many stochastic trials seeded seed+i and "
                    "print per-trial plus aggregate stats (default 1)")
      ->check(CLI::PositiveNumber);
  c_sim->add_option("--out", sim.out, "Write the trace to this file");
  c_sim->add_option("--format", sim.format,
                    "Trace file format for --out (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  c_sim->add_flag("--force", sim.force,
                  "Run even if the plan is infeasible for the profile");

  CalibrateArgs cal;
  CLI::App* c_cal = app.add_subcommand(
      "calibrate", "Fit component rates and model parameters from a "
                   "measurements CSV");
  c_cal->add_option("--measurements", cal.measurements,
                    "CSV with header component,drain_pct,avg,sd,max,min,"
                    "full_drain,context")
      ->required();
  c_cal->add_option("--out", cal.out, "Write the fitted power model JSON here")
      ->required();
  c_cal->add_option("--registry-out", cal.registry_out,
                    "Also write the calibrated component registry JSON");
  c_cal->add_option("--fit-interference", cal.fit_interference,
                    "Fit the interference factor from this '+'-joined set's "
                    "measured row (e.g. brightness+camera_flash+cpu)");
  c_cal->add_option("--fit-dim", cal.fit_dim,
                    "Fit the low-battery dim factor from this component's "
                    "full_drain column, marking it display-class");
  c_cal->add_option("--fit-charging", cal.fit_charging,
                    "Fit the charger supply from this id's unplugged and "
                    "charging rows");

  std::string chk_plan, chk_profile, chk_registry;
  CLI::App* c_chk = app.add_subcommand(
      "check", "Gate a plan against a device profile without running it");
  c_chk->add_option("--plan", chk_plan, "Attack plan JSON file")->required();
  c_chk->add_option("--profile", chk_profile, "Device profile JSON file")
      ->required();
  c_chk->add_option("--registry", chk_registry,
                    "Component registry JSON file (default: bundled "
                    "reference registry)");

  std::string rnk_dir, rnk_profile, rnk_model, rnk_registry;
  CLI::App* c_rnk = app.add_subcommand(
      "rank", "Rank every plan in a directory by drain efficacy");
  c_rnk->add_option("--plans", rnk_dir,
                    "Directory of plan JSON files (names = file stems)")
      ->required();
  c_rnk->add_option("--profile", rnk_profile, "Device profile JSON file")
      ->required();
  c_rnk->add_option("--model", rnk_model, "Power model JSON file")->required();
  c_rnk->add_option("--registry", rnk_registry,
                    "Component registry JSON file (default: bundled "
                    "reference registry)");

  std::string rep_out;
  CLI::App* c_rep = app.add_subcommand(
      "reproduce", "Replay the bundled reference measurements through the "
                   "simulator and report the gaps");
  c_rep->add_option("--out", rep_out, "Write the report as JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_cal) return run_calibrate(cal);
    if (*c_chk) return run_check(chk_plan, chk_profile, chk_registry);
    if (*c_rnk) return run_rank(rnk_dir, rnk_profile, rnk_model, rnk_registry);
    if (*c_rep) return run_reproduce(rep_out);
  } catch (const InfeasiblePlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& issue : e.issues()) std::cerr << "  - " << issue << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
