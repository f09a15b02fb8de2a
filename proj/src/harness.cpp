#include "usv/harness.hpp"

#include "usv/angles.hpp"
#include "usv/log_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace usv {

void RunningStat::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void RunningStat::merge(const RunningStat& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double RunningStat::variance() const {
  return n_ == 0 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_));
}

void ErrorAccumulator::add(const Vec3& e) {
  position_.add(std::hypot(e(0), e(1)));
  heading_.add(std::abs(rad2deg(wrap_angle(e(2)))));
}

void ErrorAccumulator::merge(const ErrorAccumulator& o) {
  position_.merge(o.position_);
  heading_.merge(o.heading_);
}

ErrorStats ErrorAccumulator::stats() const {
  ErrorStats s;
  s.samples = position_.count();
  s.mean_position = position_.mean();
  s.std_position = std::sqrt(position_.variance());
  s.mean_heading_deg = heading_.mean();
  s.std_heading_deg = std::sqrt(heading_.variance());
  return s;
}

ErrorStats compute_error_stats(const SimLog& log) {
  if (log.rows.empty()) throw std::invalid_argument("error statistics: empty log");
  ErrorAccumulator acc;
  for (const auto& r : log.rows) acc.add(r.error);
  return acc.stats();
}

namespace {

double degrees_0_360(double rad) {
  double d = rad2deg(wrap_angle(rad));
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

struct Circular {
  double mean = 0.0;  // rad
  double std = 0.0;   // rad
};

Circular circular_stats(std::span<const double> angles) {
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  const double n = static_cast<double>(angles.size());
  c /= n;
  s /= n;
  const double r = std::min(1.0, std::hypot(c, s));
  Circular out;
  out.mean = std::atan2(s, c);
  out.std = r > 0.0 ? std::sqrt(std::max(0.0, -2.0 * std::log(r))) : kPi;
  return out;
}

}  // namespace

WindStats compute_wind_stats(std::span<const WindSample> samples, double dt) {
  if (samples.size() < 2) throw std::invalid_argument("wind statistics: need at least two samples");
  std::vector<double> speed, angle;
  speed.reserve(samples.size());
  angle.reserve(samples.size());
  RunningStat rs;
  for (const auto& w : samples) {
    speed.push_back(w.speed);
    angle.push_back(w.angle);
    rs.add(w.speed);
  }
  WindStats ws;
  ws.samples = samples.size();
  ws.mean_speed = rs.mean();
  ws.std_speed = std::sqrt(rs.variance());
  const Circular c = circular_stats(angle);
  ws.mean_direction_deg = degrees_0_360(c.mean);
  ws.std_direction_deg = rad2deg(c.std);
  if (ws.mean_speed > 0.0) ws.intensity_percent = 100.0 * turbulence_stats(speed, dt).intensity;
  return ws;
}

WindStats compute_wind_stats(const SimLog& log) {
  std::vector<WindSample> raw;
  for (const auto& r : log.rows)
    if (r.wind_fresh) raw.push_back(r.wind_raw);
  if (raw.size() < 2) throw std::invalid_argument("wind statistics: log holds fewer than two anemometer samples");
  return compute_wind_stats(raw, raw[1].t - raw[0].t);
}

std::size_t MatrixReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

std::vector<MatrixCell> enumerate_cells(const MatrixConfig& cfg,
                                        const std::vector<ScenarioFile>& scenarios) {
  std::vector<MatrixCell> cells;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (ControllerKind k : cfg.controllers)
      for (bool ff : cfg.feedforward)
        for (std::uint64_t seed : cfg.seeds)
          cells.push_back({s, scenarios[s].scenario.name, k, ff, seed});
  return cells;
}

std::string cell_label(ControllerKind kind, bool feedforward) {
  std::string s(to_string(kind));
  if (feedforward) s += "+ff";
  return s;
}

namespace {

std::string log_file_name(const MatrixCell& c) {
  return c.scenario + "_" + std::string(to_string(c.controller)) + (c.feedforward ? "_ff" : "") +
         "_seed" + std::to_string(c.seed) + ".csv";
}

CellResult run_cell(const MatrixCell& cell, const ScenarioFile& base, const MatrixConfig& cfg,
                    const std::optional<std::filesystem::path>& log_dir) {
  CellResult res;
  res.cell = cell;
  try {
    ScenarioFile f = base;
    f.scenario.controller.kind = cell.controller;
    f.scenario.controller.feedforward = cell.feedforward;
    f.sim.seed = cell.seed;
    if (cfg.duration_override > 0.0) f.sim.duration = cfg.duration_override;
    SimLog log = run_station_keeping(f.scenario, f.sim);
    log.config_echo = scenario_to_json(f);
    res.errors = compute_error_stats(log);
    if (f.scenario.wind.model != WindModel::none) res.wind = compute_wind_stats(log);
    if (log_dir) {
      res.log_path = *log_dir / log_file_name(cell);
      write_log_csv(res.log_path, log);
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

WindStats average_wind(const std::vector<WindStats>& ws) {
  WindStats out;
  std::vector<double> dirs;
  for (const auto& w : ws) {
    out.mean_speed += w.mean_speed;
    out.std_speed += w.std_speed;
    out.std_direction_deg += w.std_direction_deg;
    out.intensity_percent += w.intensity_percent;
    out.samples += w.samples;
    dirs.push_back(deg2rad(w.mean_direction_deg));
  }
  const double n = static_cast<double>(ws.size());
  out.mean_speed /= n;
  out.std_speed /= n;
  out.std_direction_deg /= n;
  out.intensity_percent /= n;
  out.mean_direction_deg = degrees_0_360(circular_stats(dirs).mean);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells) {
  std::vector<SummaryRow> rows;
  std::map<std::tuple<std::size_t, int, bool>, std::size_t> index;
  std::vector<std::vector<const CellResult*>> members;
  for (const auto& c : cells) {
    const auto key = std::make_tuple(c.cell.scenario_index, static_cast<int>(c.cell.controller),
                                     c.cell.feedforward);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      SummaryRow r;
      r.scenario = c.cell.scenario;
      r.controller = c.cell.controller;
      r.feedforward = c.cell.feedforward;
      rows.push_back(r);
      members.emplace_back();
    }
    if (c.ok) members[it->second].push_back(&c);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = members[i];
    SummaryRow& r = rows[i];
    r.runs = m.size();
    if (m.empty()) continue;
    std::vector<WindStats> winds;
    for (const CellResult* c : m) {
      r.errors.mean_position += c->errors.mean_position;
      r.errors.std_position += c->errors.std_position;
      r.errors.mean_heading_deg += c->errors.mean_heading_deg;
      r.errors.std_heading_deg += c->errors.std_heading_deg;
      r.errors.samples += c->errors.samples;
      if (c->wind) winds.push_back(*c->wind);
    }
    const double n = static_cast<double>(m.size());
    r.errors.mean_position /= n;
    r.errors.std_position /= n;
    r.errors.mean_heading_deg /= n;
    r.errors.std_heading_deg /= n;
    if (!winds.empty()) r.wind = average_wind(winds);
  }
  return rows;
}

std::string fixed(double v, int precision = 3) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  std::string s(buf, res.ptr);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string pretty_label(ControllerKind k, bool ff) {
  std::string s;
  switch (k) {
    case ControllerKind::pd: s = "PD"; break;
    case ControllerKind::backstepping: s = "Backstepping"; break;
    case ControllerKind::sliding: s = "Sliding Mode"; break;
  }
  return ff ? s + " + FF" : s;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

MatrixReport run_experiment_matrix(const MatrixConfig& cfg,
                                   const std::vector<ScenarioFile>& scenarios,
                                   const MatrixOptions& opts) {
  const std::vector<MatrixCell> cells = enumerate_cells(cfg, scenarios);
  if (opts.log_dir) std::filesystem::create_directories(*opts.log_dir);

  MatrixReport report;
  report.name = cfg.name;
  report.cells.resize(cells.size());

  unsigned threads = opts.threads ? opts.threads : cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      report.cells[i] = run_cell(cells[i], scenarios[cells[i].scenario_index], cfg, opts.log_dir);
  };
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, worker));
  for (auto& j : jobs) j.get();

  report.summary = summarize(report.cells);
  return report;
}

MatrixReport run_experiment_matrix(const MatrixConfig& cfg, const MatrixOptions& opts) {
  std::vector<ScenarioFile> scenarios;
  for (const auto& p : cfg.scenario_paths) scenarios.push_back(load_scenario(p));
  return run_experiment_matrix(cfg, scenarios, opts);
}

std::string format_summary_table(const MatrixReport& report) {
  std::ostringstream os;
  os << "Experiment matrix: " << report.name << '\n';
  std::vector<std::string> order;
  for (const auto& r : report.summary)
    if (std::find(order.begin(), order.end(), r.scenario) == order.end()) order.push_back(r.scenario);

  for (const auto& name : order) {
    std::vector<const SummaryRow*> cols;
    for (const auto& r : report.summary)
      if (r.scenario == name) cols.push_back(&r);
    bool any_wind = false;
    for (const SummaryRow* c : cols) any_wind = any_wind || c->wind.has_value();

    constexpr std::size_t label_w = 36;
    std::size_t col_w = 12;
    for (const SummaryRow* c : cols)
      col_w = std::max(col_w, pretty_label(c->controller, c->feedforward).size() + 2);

    os << '\n' << "Scenario: " << name << '\n';
    os << pad_right("Controller", label_w);
    for (const SummaryRow* c : cols) os << pad_left(pretty_label(c->controller, c->feedforward), col_w);
    os << '\n';
    auto line = [&](const std::string& label, auto value) {
      os << pad_right(label, label_w);
      for (const SummaryRow* c : cols) os << pad_left(c->runs ? value(*c) : std::string("n/a"), col_w);
      os << '\n';
    };
    line("Runs", [](const SummaryRow& r) { return std::to_string(r.runs); });
    line("Mean Position Error (m)", [](const SummaryRow& r) { return fixed(r.errors.mean_position); });
    line("Std Position Error (m)", [](const SummaryRow& r) { return fixed(r.errors.std_position); });
    line("Mean Heading Error (deg)", [](const SummaryRow& r) { return fixed(r.errors.mean_heading_deg); });
    line("Std Heading Error (deg)", [](const SummaryRow& r) { return fixed(r.errors.std_heading_deg); });
    if (any_wind) {
      auto w = [](auto field) {
        return [field](const SummaryRow& r) { return r.wind ? fixed(field(*r.wind)) : std::string("-"); };
      };
      line("Mean Apparent Wind Speed (m/s)", w([](const WindStats& s) { return s.mean_speed; }));
      line("Std Apparent Wind Speed (m/s)", w([](const WindStats& s) { return s.std_speed; }));
      line("Mean Apparent Wind Direction (deg)", w([](const WindStats& s) { return s.mean_direction_deg; }));
      line("Std Apparent Wind Direction (deg)", w([](const WindStats& s) { return s.std_direction_deg; }));
      line("Wind Turbulence Intensity (%)", w([](const WindStats& s) { return s.intensity_percent; }));
    }
  }
  const std::size_t failed = report.failures();
  if (failed) {
    os << '\n' << failed << " run(s) aborted:\n";
    for (const auto& c : report.cells)
      if (!c.ok)
        os << "  " << c.cell.scenario << ' ' << cell_label(c.cell.controller, c.cell.feedforward)
           << " seed " << c.cell.seed << ": " << c.error << '\n';
  }
  return os.str();
}

namespace {

void stats_fields(nlohmann::ordered_json& j, const ErrorStats& e, const std::optional<WindStats>& w) {
  j["mean_position_error_m"] = e.mean_position;
  j["std_position_error_m"] = e.std_position;
  j["mean_heading_error_deg"] = e.mean_heading_deg;
  j["std_heading_error_deg"] = e.std_heading_deg;
  if (w) {
    j["mean_wind_speed_mps"] = w->mean_speed;
    j["std_wind_speed_mps"] = w->std_speed;
    j["mean_wind_direction_deg"] = w->mean_direction_deg;
    j["std_wind_direction_deg"] = w->std_direction_deg;
    j["turbulence_intensity_percent"] = w->intensity_percent;
  }
}

const char* kStatsHeader =
    "mean_position_error_m,std_position_error_m,mean_heading_error_deg,std_heading_error_deg,"
    "mean_wind_speed_mps,std_wind_speed_mps,mean_wind_direction_deg,std_wind_direction_deg,"
    "turbulence_intensity_percent";

std::string stats_csv_fields(const ErrorStats& e, const std::optional<WindStats>& w) {
  std::string s = format_number(e.mean_position) + ',' + format_number(e.std_position) + ',' +
                  format_number(e.mean_heading_deg) + ',' + format_number(e.std_heading_deg);
  if (w) {
    s += ',' + format_number(w->mean_speed) + ',' + format_number(w->std_speed) + ',' +
         format_number(w->mean_direction_deg) + ',' + format_number(w->std_direction_deg) + ',' +
         format_number(w->intensity_percent);
  } else {
    s += ",,,,,";
  }
  return s;
}

}  // namespace

std::string summary_csv(const MatrixReport& report) {
  std::string out = std::string("scenario,controller,feedforward,runs,") + kStatsHeader + '\n';
  for (const auto& r : report.summary) {
    out += r.scenario + ',' + std::string(to_string(r.controller)) + ',' +
           (r.feedforward ? "true" : "false") + ',' + std::to_string(r.runs) + ',' +
           stats_csv_fields(r.errors, r.wind) + '\n';
  }
  return out;
}

std::string summary_json(const MatrixReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["runs"] = report.cells.size();
  j["failures"] = report.failures();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.summary) {
    nlohmann::ordered_json o;
    o["scenario"] = r.scenario;
    o["controller"] = std::string(to_string(r.controller));
    o["feedforward"] = r.feedforward;
    o["runs"] = r.runs;
    stats_fields(o, r.errors, r.wind);
    rows.push_back(o);
  }
  j["summary"] = rows;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json o;
    o["scenario"] = c.cell.scenario;
    o["controller"] = std::string(to_string(c.cell.controller));
    o["feedforward"] = c.cell.feedforward;
    o["seed"] = c.cell.seed;
    o["ok"] = c.ok;
    if (!c.ok) o["error"] = c.error;
    if (c.ok) stats_fields(o, c.errors, c.wind);
    if (!c.log_path.empty()) o["log"] = c.log_path.filename().string();
    cells.push_back(o);
  }
  j["cells"] = cells;
  return j.dump(2) + '\n';
}

std::string stats_json(const ErrorStats& e, const std::optional<WindStats>& w) {
  nlohmann::ordered_json j;
  stats_fields(j, e, w);
  j["samples"] = e.samples;
  return j.dump(2) + '\n';
}

std::string stats_csv(const ErrorStats& e, const std::optional<WindStats>& w) {
  return std::string(kStatsHeader) + '\n' + stats_csv_fields(e, w) + '\n';
}

}  // namespace usv
