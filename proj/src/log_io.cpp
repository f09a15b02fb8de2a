#include "usv/log_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace usv {

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols{
      "t_s",
      "north_m", "east_m", "heading_rad", "surge_mps", "sway_mps", "yaw_rate_radps",
      "sensed_north_m", "sensed_east_m", "sensed_heading_rad",
      "sensed_surge_mps", "sensed_sway_mps", "sensed_yaw_rate_radps",
      "err_north_m", "err_east_m", "err_heading_rad",
      "tau_x_n", "tau_y_n", "tau_n_nm",
      "tau_wind_x_n", "tau_wind_y_n", "tau_wind_n_nm",
      "tau_cmd_x_n", "tau_cmd_y_n", "tau_cmd_n_nm",
      "f_port_x_n", "f_port_y_n", "f_stbd_x_n", "f_stbd_y_n",
      "cmd_thrust_port_n", "cmd_thrust_stbd_n", "cmd_azimuth_port_rad", "cmd_azimuth_stbd_rad",
      "act_thrust_port_n", "act_thrust_stbd_n", "act_azimuth_port_rad", "act_azimuth_stbd_rad",
      "saturated", "wind_fresh",
      "wind_t_s", "wind_raw_speed_mps", "wind_raw_angle_rad",
      "wind_filt_speed_mps", "wind_filt_angle_rad"};
  return cols;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void put_row(std::string& out, const LogRow& r) {
  std::vector<double> v;
  v.reserve(log_columns().size());
  v.push_back(r.t);
  for (int i = 0; i < 3; ++i) v.push_back(r.truth.eta(i));
  for (int i = 0; i < 3; ++i) v.push_back(r.truth.nu(i));
  for (int i = 0; i < 3; ++i) v.push_back(r.sensed.eta(i));
  for (int i = 0; i < 3; ++i) v.push_back(r.sensed.nu(i));
  for (int i = 0; i < 3; ++i) v.push_back(r.error(i));
  for (const Wrench* w : {&r.tau, &r.tau_wind_estimate, &r.tau_command}) {
    v.push_back(w->x);
    v.push_back(w->y);
    v.push_back(w->n);
  }
  for (int i = 0; i < 4; ++i) v.push_back(r.extended(i));
  for (const ThrusterSetpoint* s : {&r.commanded, &r.applied}) {
    v.push_back(s->thrust_port);
    v.push_back(s->thrust_stbd);
    v.push_back(s->azimuth_port);
    v.push_back(s->azimuth_stbd);
  }
  v.push_back(r.saturated ? 1.0 : 0.0);
  v.push_back(r.wind_fresh ? 1.0 : 0.0);
  v.push_back(r.wind_raw.t);
  v.push_back(r.wind_raw.speed);
  v.push_back(r.wind_raw.angle);
  v.push_back(r.wind_filtered.speed);
  v.push_back(r.wind_filtered.angle);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_number(v[i]);
  }
  out += '\n';
}

LogRow parse_row(const std::vector<double>& v) {
  LogRow r;
  std::size_t k = 0;
  r.t = v[k++];
  for (int i = 0; i < 3; ++i) r.truth.eta(i) = v[k++];
  for (int i = 0; i < 3; ++i) r.truth.nu(i) = v[k++];
  for (int i = 0; i < 3; ++i) r.sensed.eta(i) = v[k++];
  for (int i = 0; i < 3; ++i) r.sensed.nu(i) = v[k++];
  for (int i = 0; i < 3; ++i) r.error(i) = v[k++];
  for (Wrench* w : {&r.tau, &r.tau_wind_estimate, &r.tau_command}) {
    w->x = v[k++];
    w->y = v[k++];
    w->n = v[k++];
  }
  for (int i = 0; i < 4; ++i) r.extended(i) = v[k++];
  for (ThrusterSetpoint* s : {&r.commanded, &r.applied}) {
    s->thrust_port = v[k++];
    s->thrust_stbd = v[k++];
    s->azimuth_port = v[k++];
    s->azimuth_stbd = v[k++];
  }
  r.saturated = v[k++] != 0.0;
  r.wind_fresh = v[k++] != 0.0;
  r.wind_raw.t = r.wind_filtered.t = v[k++];
  r.wind_raw.speed = v[k++];
  r.wind_raw.angle = v[k++];
  r.wind_filtered.speed = v[k++];
  r.wind_filtered.angle = v[k++];
  return r;
}

std::string header_line() {
  std::string h;
  for (const auto& c : log_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

}  // namespace

std::string log_to_csv(const SimLog& log) {
  std::string out;
  out.reserve(log.rows.size() * 600 + 1024);
  out += "# usvkeep log\n";
  out += std::string("# version: ") + kVersion + '\n';
  out += "# scenario: " + log.scenario + '\n';
  out += "# seed: " + std::to_string(log.seed) + '\n';
  if (!log.config_echo.empty()) out += "# config: " + log.config_echo + '\n';
  out += header_line() + '\n';
  for (const auto& r : log.rows) put_row(out, r);
  return out;
}

SimLog log_from_csv(const std::string& text, const std::string& origin) {
  SimLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  const std::size_t ncols = log_columns().size();
  std::vector<double> vals(ncols);
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(origin + ':' + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      while (!key.empty() && key.front() == ' ') key.erase(0, 1);
      std::string value = line.substr(colon + 1);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      if (key == "scenario") {
        log.scenario = value;
      } else if (key == "seed") {
        const auto res = std::from_chars(value.data(), value.data() + value.size(), log.seed);
        if (res.ec != std::errc()) fail("bad seed '" + value + "'");
      } else if (key == "config") {
        log.config_echo = value;
      }
      continue;
    }
    if (!header) {
      if (line != header_line()) fail("unexpected header; expected the documented log columns");
      header = true;
      continue;
    }
    std::size_t col = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      if (col >= ncols) fail("too many fields (expected " + std::to_string(ncols) + ")");
      const auto res = std::from_chars(p, end, vals[col]);
      if (res.ec != std::errc()) fail("bad number in column '" + log_columns()[col] + "'");
      ++col;
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') fail("unexpected character in column '" + log_columns()[col - 1] + "'");
      ++p;
    }
    if (col != ncols)
      fail("expected " + std::to_string(ncols) + " fields, found " + std::to_string(col));
    log.rows.push_back(parse_row(vals));
  }
  if (!header) throw std::runtime_error(origin + ": no header line found");
  return log;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_log_csv(const std::filesystem::path& path, const SimLog& log) {
  write_text_file(path, log_to_csv(log));
}

SimLog read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return log_from_csv(ss.str(), path.string());
}

}  // namespace usv
