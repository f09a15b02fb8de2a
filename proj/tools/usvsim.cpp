// usvsim: command-line front end for the station-keeping simulator.
//
// Exit codes: 0 success, 1 a simulation aborted or output could not be
// written, 2 bad usage or an invalid configuration.

#include "usv/angles.hpp"
#include "usv/config.hpp"
#include "usv/harness.hpp"
#include "usv/log_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace usv;

namespace {

constexpr int kOk = 0;
constexpr int kRunFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw UsageError(what + " '" + p.string() + "' is not a readable file");
}

// Creates the directory and proves it is writable before any work starts.
void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_directory(dir, ec))
    throw UsageError("output path '" + dir.string() + "' exists and is not a directory");
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path probe = dir / ".usvsim_probe";
  try {
    write_text_file(probe, "");
  } catch (const std::exception&) {
    throw UsageError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void emit(const std::string& text, const std::optional<fs::path>& file) {
  std::cout << text;
  if (file) write_text_file(*file, text);
}

std::string stats_text(const ErrorStats& e, const std::optional<WindStats>& w) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "mean position error   " << e.mean_position << " m\n"
     << "std position error    " << e.std_position << " m\n"
     << "mean heading error    " << e.mean_heading_deg << " deg\n"
     << "std heading error     " << e.std_heading_deg << " deg\n";
  if (w) {
    os << "mean apparent wind    " << w->mean_speed << " m/s @ " << w->mean_direction_deg << " deg\n"
       << "std apparent wind     " << w->std_speed << " m/s, " << w->std_direction_deg << " deg\n"
       << "turbulence intensity  " << w->intensity_percent << " %\n";
  }
  return os.str();
}

std::string format_stats(const std::string& format, const ErrorStats& e,
                         const std::optional<WindStats>& w) {
  if (format == "json") return stats_json(e, w);
  if (format == "csv") return stats_csv(e, w);
  return stats_text(e, w);
}

std::string ext_for(const std::string& format) {
  if (format == "json") return ".json";
  if (format == "csv") return ".csv";
  return ".txt";
}

bool has_wind_samples(const SimLog& log) {
  return std::count_if(log.rows.begin(), log.rows.end(),
                       [](const LogRow& r) { return r.wind_fresh && r.wind_raw.speed > 0.0; }) >= 2;
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::string> controller;
  std::optional<bool> feedforward;
  std::string out = "out";
  std::string format = "text";
};

int cmd_simulate(const SimulateArgs& a) {
  require_file(a.scenario, "scenario");
  ScenarioFile f = load_scenario(a.scenario);
  if (a.seed) f.sim.seed = *a.seed;
  if (a.duration) f.sim.duration = *a.duration;
  if (a.controller) {
    try {
      f.scenario.controller.kind = controller_kind_from_string(*a.controller);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (a.feedforward) f.scenario.controller.feedforward = *a.feedforward;
  f.sim.validate();
  prepare_out_dir(a.out);

  SimLog log;
  try {
    log = run_station_keeping(f.scenario, f.sim);
  } catch (const SimulationError& e) {
    std::cerr << "usvsim: run aborted: " << e.what() << '\n';
    return kRunFailed;
  }
  log.config_echo = scenario_to_json(f);
  const std::string stem = f.scenario.name + "_seed" + std::to_string(f.sim.seed);
  write_log_csv(fs::path(a.out) / (stem + ".csv"), log);
  const ErrorStats e = compute_error_stats(log);
  std::optional<WindStats> w;
  if (f.scenario.wind.model != WindModel::none) w = compute_wind_stats(log);
  emit(format_stats(a.format, e, w), fs::path(a.out) / (stem + "_stats" + ext_for(a.format)));
  return kOk;
}

struct MatrixArgs {
  std::string config;
  std::string out = "out";
  std::string format = "text";
  unsigned threads = 0;
  bool no_logs = false;
  std::optional<std::uint64_t> seed;
};

int cmd_matrix(const MatrixArgs& a) {
  require_file(a.config, "matrix config");
  MatrixConfig cfg = load_matrix(a.config);
  if (a.seed) cfg.seeds = {*a.seed};
  std::vector<ScenarioFile> scenarios;
  for (const auto& p : cfg.scenario_paths) {
    require_file(p, "scenario");
    scenarios.push_back(load_scenario(p));
  }
  prepare_out_dir(a.out);
  MatrixOptions opts;
  opts.threads = a.threads;
  if (!a.no_logs) {
    opts.log_dir = fs::path(a.out) / "logs";
    prepare_out_dir(*opts.log_dir);
  }
  const MatrixReport report = run_experiment_matrix(cfg, scenarios, opts);
  const std::string table = format_summary_table(report);
  write_text_file(fs::path(a.out) / "summary.txt", table);
  if (a.format == "csv") {
    emit(summary_csv(report), fs::path(a.out) / "summary.csv");
  } else if (a.format == "json") {
    emit(summary_json(report), fs::path(a.out) / "summary.json");
  } else {
    std::cout << table;
  }
  if (report.failures()) {
    std::cerr << "usvsim: " << report.failures() << " of " << report.cells.size()
              << " runs aborted\n";
    return kRunFailed;
  }
  return kOk;
}

struct SysidArgs {
  std::string maneuver;
  std::string out = "out";
  std::optional<double> throttle;
  double nominal_speed = 1.0;
};

int cmd_sysid(const SysidArgs& a) {
  Maneuver m;
  try {
    m = maneuver_from_string(a.maneuver);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (!(a.nominal_speed > 0.0)) throw UsageError("--nominal-speed must be positive");
  ManeuverParams p;
  p.vehicle = wamv16_params(a.nominal_speed);
  if (a.throttle) p.throttle = *a.throttle;
  prepare_out_dir(a.out);
  SimLog log;
  try {
    log = run_sysid_maneuver(m, p);
  } catch (const SimulationError& e) {
    std::cerr << "usvsim: run aborted: " << e.what() << '\n';
    return kRunFailed;
  }
  const fs::path file = fs::path(a.out) / ("sysid_" + to_string(m) + ".csv");
  write_log_csv(file, log);

  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "maneuver " << to_string(m) << ": " << log.rows.size() << " rows -> " << file.string() << '\n';
  if (m == Maneuver::bollard) {
    const LogRow& last = log.rows.back();
    os << "bollard pull at 100%: " << last.tau.x << " N\n";
  } else {
    double max_u = 0.0, max_r = 0.0, max_psi = 0.0;
    for (const auto& r : log.rows) {
      max_u = std::max(max_u, r.truth.nu(0));
      max_r = std::max(max_r, std::abs(r.truth.nu(2)));
      max_psi = std::max(max_psi, std::abs(rad2deg(r.truth.eta(2))));
    }
    const LogRow& last = log.rows.back();
    os << "peak surge speed " << max_u << " m/s, final surge speed " << last.truth.nu(0) << " m/s\n"
       << "peak yaw rate " << rad2deg(max_r) << " deg/s, final yaw rate "
       << rad2deg(last.truth.nu(2)) << " deg/s, peak |heading| " << max_psi << " deg\n";
  }
  std::cout << os.str();
  return kOk;
}

struct WindgenArgs {
  std::string params;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string format = "text";
};

int cmd_windgen(const WindgenArgs& a) {
  require_file(a.params, "wind parameters");
  WindgenConfig w = load_windgen(a.params);
  if (a.seed) w.spec.seed = *a.seed;
  prepare_out_dir(a.out);
  WindSeries series;
  try {
    series = synthesize_wind(w.spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string stem = "wind_seed" + std::to_string(w.spec.seed);
  write_wind_csv(fs::path(a.out) / (stem + ".csv"), series);

  std::vector<double> speed;
  for (const auto& s : series.samples) speed.push_back(s.speed);
  const TurbulenceStats st = turbulence_stats(speed, series.dt);
  nlohmann::ordered_json j;
  j["samples"] = series.samples.size();
  j["dt_s"] = series.dt;
  j["mean_speed_mps"] = st.mean;
  j["tke_mps"] = st.tke;
  j["intensity"] = st.intensity;
  j["f90_hz"] = st.f90;
  j["length_scale_m"] = st.length_scale;
  j["energy_below_cutoff"] = st.energy_fraction_below(w.spec.cutoff_hz);
  std::string text;
  if (a.format == "json") {
    text = j.dump(2) + '\n';
  } else if (a.format == "csv") {
    std::string h, v;
    for (auto it = j.begin(); it != j.end(); ++it) {
      h += (h.empty() ? "" : ",") + it.key();
      v += (v.empty() ? "" : ",") + it.value().dump();
    }
    text = h + '\n' + v + '\n';
  } else {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "samples               " << series.samples.size() << " at " << series.dt << " s\n"
       << "mean speed            " << st.mean << " m/s\n"
       << "TKE (rms)             " << st.tke << " m/s\n"
       << "intensity             " << st.intensity << '\n'
       << "f90                   " << st.f90 << " Hz\n"
       << "length scale          " << st.length_scale << " m\n"
       << "energy below cutoff   " << st.energy_fraction_below(w.spec.cutoff_hz) << '\n';
    text = os.str();
  }
  emit(text, fs::path(a.out) / (stem + "_stats" + ext_for(a.format)));
  return kOk;
}

struct StatsArgs {
  std::string log;
  std::string format = "text";
  std::optional<std::string> out;
};

int cmd_stats(const StatsArgs& a) {
  require_file(a.log, "log");
  if (a.out) prepare_out_dir(*a.out);
  SimLog log;
  try {
    log = read_log_csv(a.log);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (log.rows.empty()) throw UsageError("log '" + a.log + "' has no rows");
  const ErrorStats e = compute_error_stats(log);
  std::optional<WindStats> w;
  if (has_wind_samples(log)) w = compute_wind_stats(log);
  std::optional<fs::path> file;
  if (a.out) file = fs::path(*a.out) / (fs::path(a.log).stem().string() + "_stats" + ext_for(a.format));
  emit(format_stats(a.format, e, w), file);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Station-keeping simulator for a twin-hull USV with azimuthing thrusters"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  const std::vector<std::string> formats{"text", "csv", "json"};

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run one scenario file and write its log and statistics");
  s->add_option("scenario", sim.scenario, "scenario JSON file")->required();
  s->add_option("--seed", sim.seed, "override the scenario seed");
  s->add_option("--duration", sim.duration, "override the run length, s")->check(CLI::PositiveNumber);
  s->add_option("--controller", sim.controller, "pd, backstepping or sliding");
  s->add_option("--feedforward", sim.feedforward, "wind feedforward on/off");
  s->add_option("--out", sim.out, "output directory")->capture_default_str();
  s->add_option("--format", sim.format, "statistics format")->check(CLI::IsMember(formats))->capture_default_str();

  MatrixArgs mx;
  auto* m = app.add_subcommand("matrix", "run every cell of an experiment matrix");
  m->add_option("config", mx.config, "matrix JSON file")->required();
  m->add_option("--out", mx.out, "output directory")->capture_default_str();
  m->add_option("--format", mx.format, "summary format")->check(CLI::IsMember(formats))->capture_default_str();
  m->add_option("--threads", mx.threads, "worker threads, 0 = all cores");
  m->add_option("--seed", mx.seed, "run a single seed instead of the configured list");
  m->add_flag("--no-logs", mx.no_logs, "skip per-cell CSV logs");

  SysidArgs sy;
  auto* y = app.add_subcommand("sysid", "replay an open-loop identification maneuver");
  y->add_option("maneuver", sy.maneuver, "bollard, acceleration, circle or zigzag")->required();
  y->add_option("--out", sy.out, "output directory")->capture_default_str();
  y->add_option("--throttle", sy.throttle, "run-up throttle, %")->check(CLI::Range(-100.0, 100.0));
  y->add_option("--nominal-speed", sy.nominal_speed, "hydrodynamic linearization speed, m/s")
      ->capture_default_str();

  WindgenArgs wg;
  auto* w = app.add_subcommand("windgen", "synthesize a turbulent wind trace");
  w->add_option("params", wg.params, "wind parameter JSON file")->required();
  w->add_option("--seed", wg.seed, "override the seed");
  w->add_option("--out", wg.out, "output directory")->capture_default_str();
  w->add_option("--format", wg.format, "statistics format")->check(CLI::IsMember(formats))->capture_default_str();

  StatsArgs st;
  auto* t = app.add_subcommand("stats", "error and wind statistics of a recorded log");
  t->add_option("log", st.log, "log CSV written by simulate or matrix")->required();
  t->add_option("--format", st.format, "output format")->check(CLI::IsMember(formats))->capture_default_str();
  t->add_option("--out", st.out, "also write the statistics into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*m) return cmd_matrix(mx);
    if (*y) return cmd_sysid(sy);
    if (*w) return cmd_windgen(wg);
    if (*t) return cmd_stats(st);
  } catch (const UsageError& e) {
    std::cerr << "usvsim: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "usvsim: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usvsim: invalid configuration: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "usvsim: " << e.what() << '\n';
    return kRunFailed;
  }
  return kUsage;
}
