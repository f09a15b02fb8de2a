#include "usv/config.hpp"

#include "usv/angles.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace usv {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct LineCol {
  std::size_t line = 1;
  std::size_t col = 1;
};

LineCol line_col(const std::string& text, std::size_t offset) {
  LineCol lc;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++lc.line;
      lc.col = 1;
    } else {
      ++lc.col;
    }
  }
  return lc;
}

// Best-effort source position of a dotted key path: each component is
// searched for as a quoted key after the position of its parent.
std::size_t locate(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  std::size_t found = 0;
  for (const auto& key : path) {
    if (key.empty() || key.front() == '[') continue;
    const std::size_t p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    found = pos = p;
  }
  return found;
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (const auto& p : path) {
      if (!dotted.empty() && p.front() != '[') dotted += '.';
      dotted += p;
    }
    const LineCol lc = line_col(text_, locate(text_, path));
    std::ostringstream os;
    os << origin_ << ':' << lc.line << ':' << lc.col << ": " << (dotted.empty() ? "<root>" : dotted)
       << ": " << msg;
    throw ParseError(os.str());
  }

  json parse() const {
    try {
      return json::parse(text_);
    } catch (const json::parse_error& e) {
      const LineCol lc = line_col(text_, e.byte > 0 ? e.byte - 1 : 0);
      std::ostringstream os;
      os << origin_ << ':' << lc.line << ':' << lc.col << ": malformed JSON: " << e.what();
      throw ParseError(os.str());
    }
  }

 private:
  const std::string& text_;
  std::string origin_;
};

// Typed access to one JSON object with unknown-key detection.
class Obj {
 public:
  Obj(const Reader& r, const json& j, std::vector<std::string> path)
      : r_(r), j_(j), path_(std::move(path)) {
    if (!j_.is_object()) r_.fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double num(const std::string& key, double fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) r_.fail(sub(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) r_.fail(sub(key), "expected a finite number");
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = num(key, fallback);
    if (!(d > 0.0)) r_.fail(sub(key), "must be positive");
    return d;
  }

  double non_negative(const std::string& key, double fallback) {
    const double d = num(key, fallback);
    if (d < 0.0) r_.fail(sub(key), "must be non-negative");
    return d;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      r_.fail(sub(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) r_.fail(sub(key), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key, const std::string& fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) r_.fail(sub(key), "expected a string");
    return v.get<std::string>();
  }

  const json* raw(const std::string& key) {
    if (!take(key)) return nullptr;
    return &j_.at(key);
  }

  std::optional<Obj> child(const std::string& key) {
    if (!take(key)) return std::nullopt;
    return Obj(r_, j_.at(key), sub(key));
  }

  std::vector<std::string> sub(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  const Reader& reader() const { return r_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) r_.fail(sub(it.key()), "unknown key");
  }

 private:
  bool take(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Reader& r_;
  const json& j_;
  std::vector<std::string> path_;
  std::set<std::string> used_;
};

Vec3 axes(Obj& parent, const std::string& key, const Vec3& fallback,
          const std::array<const char*, 3>& names) {
  auto o = parent.child(key);
  if (!o) return fallback;
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = o->num(names[i], fallback(i));
  o->finish();
  return v;
}

ojson axes_json(const Vec3& v, const std::array<const char*, 3>& names) {
  ojson o = ojson::object();
  for (int i = 0; i < 3; ++i) o[names[i]] = v(i);
  return o;
}

constexpr std::array<const char*, 3> kKp{"surge_n_per_m", "sway_n_per_m", "yaw_nm_per_rad"};
constexpr std::array<const char*, 3> kKd{"surge_ns_per_m", "sway_ns_per_m", "yaw_nms_per_rad"};
constexpr std::array<const char*, 3> kR{"surge_n", "sway_n", "yaw_nm"};
constexpr std::array<const char*, 3> kE{"surge_mps", "sway_mps", "yaw_radps"};
constexpr std::array<const char*, 3> kLambda{"surge_per_s", "sway_per_s", "yaw_per_s"};

Vec3 lambda_field(Obj& o, const Vec3& fallback) {
  const json* v = o.raw("lambda_per_s");
  if (!v) return fallback;
  if (v->is_number()) {
    const double d = v->get<double>();
    if (!(d > 0.0)) o.reader().fail(o.sub("lambda_per_s"), "must be positive");
    return Vec3::Constant(d);
  }
  Obj lo(o.reader(), *v, o.sub("lambda_per_s"));
  Vec3 out;
  for (int i = 0; i < 3; ++i) out(i) = lo.positive(kLambda[i], fallback(i));
  lo.finish();
  return out;
}

ojson lambda_json(const Vec3& l) {
  if (l(0) == l(1) && l(1) == l(2)) return l(0);
  return axes_json(l, kLambda);
}

Vec3 pose(Obj& parent, const std::string& key) {
  auto o = parent.child(key);
  if (!o) return Vec3::Zero();
  Vec3 v(o->num("north_m", 0.0), o->num("east_m", 0.0), deg2rad(o->num("heading_deg", 0.0)));
  o->finish();
  return v;
}

ojson pose_json(const Vec3& v) {
  return ojson{{"north_m", v(0)}, {"east_m", v(1)}, {"heading_deg", rad2deg(v(2))}};
}

WindModel wind_model_from(const Reader& r, const std::vector<std::string>& path,
                          const std::string& s) {
  if (s == "none") return WindModel::none;
  if (s == "synthetic") return WindModel::synthetic;
  if (s == "trace") return WindModel::trace;
  r.fail(path, "unknown wind model '" + s + "' (expected none, synthetic or trace)");
}

const char* wind_model_name(WindModel m) {
  switch (m) {
    case WindModel::none: return "none";
    case WindModel::synthetic: return "synthetic";
    case WindModel::trace: return "trace";
  }
  return "none";
}

ControllerKind kind_from(const Reader& r, const std::vector<std::string>& path,
                         const std::string& s) {
  try {
    return controller_kind_from_string(s);
  } catch (const ConfigError& e) {
    r.fail(path, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

void read_simulation(Obj& o, SimConfig& sim) {
  sim.dt = o.positive("dt_s", sim.dt);
  sim.control_rate = o.positive("control_rate_hz", sim.control_rate);
  sim.anemometer_rate = o.positive("anemometer_rate_hz", sim.anemometer_rate);
  sim.duration = o.positive("duration_s", sim.duration);
  sim.seed = o.uint("seed", sim.seed);
  const std::string vs = o.str("velocity_source",
                               sim.velocity_source == VelocitySource::model ? "model"
                                                                            : "differentiated");
  if (vs == "model") {
    sim.velocity_source = VelocitySource::model;
  } else if (vs == "differentiated") {
    sim.velocity_source = VelocitySource::differentiated;
  } else {
    o.reader().fail(o.sub("velocity_source"), "expected model or differentiated");
  }
  if (auto s = o.child("sensors")) {
    sim.sensors.enabled = s->flag("enabled", sim.sensors.enabled);
    sim.sensors.gps_resolution = s->positive("gps_resolution_m", sim.sensors.gps_resolution);
    sim.sensors.compass_resolution =
        s->positive("compass_resolution_deg", sim.sensors.compass_resolution);
    sim.sensors.anemometer_resolution =
        s->positive("anemometer_resolution_mps", sim.sensors.anemometer_resolution);
    sim.sensors.anemometer_max = s->positive("anemometer_max_mps", sim.sensors.anemometer_max);
    s->finish();
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioFile parse_scenario(const std::string& text, const std::string& origin,
                            const std::filesystem::path& base_dir) {
  const Reader r(text, origin);
  const json root = r.parse();
  Obj o(r, root, {});

  ScenarioFile f;
  Scenario& sc = f.scenario;
  sc.name = o.str("name", sc.name);
  f.hydro_nominal_speed = o.positive("hydro_nominal_speed_mps", f.hydro_nominal_speed);
  sc.vehicle = wamv16_params(f.hydro_nominal_speed);

  if (auto v = o.child("vehicle")) {
    sc.vehicle.mass = v->positive("mass_kg", sc.vehicle.mass);
    sc.vehicle.inertia_z = v->positive("inertia_z_kgm2", sc.vehicle.inertia_z);
    sc.vehicle.thrust_max = v->positive("thrust_forward_max_n", sc.vehicle.thrust_max);
    sc.vehicle.thrust_reverse = v->non_negative("thrust_reverse_max_n", sc.vehicle.thrust_reverse);
    sc.vehicle.azimuth_max =
        deg2rad(v->positive("azimuth_limit_deg", rad2deg(sc.vehicle.azimuth_max)));
    v->finish();
  }
  sc.allocator = AllocatorConfig::from(sc.vehicle);
  if (auto a = o.child("allocator")) {
    sc.allocator.tau_thrust = a->positive("thrust_filter_s", sc.allocator.tau_thrust);
    sc.allocator.tau_azimuth = a->positive("azimuth_filter_s", sc.allocator.tau_azimuth);
    if (const json* w = a->raw("weights")) {
      if (!w->is_array() || w->size() != static_cast<std::size_t>(sc.allocator.weights.size()))
        r.fail(a->sub("weights"), "expected an array of " +
                                      std::to_string(sc.allocator.weights.size()) + " numbers");
      for (std::size_t i = 0; i < w->size(); ++i) {
        if (!(*w)[i].is_number() || !((*w)[i].get<double>() > 0.0))
          r.fail(a->sub("weights"), "weights must be positive numbers");
        sc.allocator.weights(static_cast<Eigen::Index>(i)) = (*w)[i].get<double>();
      }
    }
    a->finish();
  }

  sc.setpoint.eta_d = pose(o, "setpoint");
  sc.initial_offset = pose(o, "initial_offset");

  if (auto w = o.child("wind")) {
    sc.wind.model = wind_model_from(r, w->sub("model"), w->str("model", "synthetic"));
    WindSynthesisSpec& s = sc.wind.synthetic;
    s.mean_speed = w->non_negative("mean_speed_mps", s.mean_speed);
    s.mean_direction = deg2rad(w->num("mean_direction_deg", rad2deg(s.mean_direction)));
    s.intensity = w->non_negative("intensity", s.intensity);
    s.cutoff_hz = w->positive("cutoff_hz", s.cutoff_hz);
    s.direction_std = deg2rad(w->non_negative("direction_std_deg", rad2deg(s.direction_std)));
    const std::string trace = w->str("trace_path", "");
    if (sc.wind.model == WindModel::trace) {
      if (trace.empty()) r.fail(w->sub("trace_path"), "required when model is trace");
      f.wind_trace_path = resolve(base_dir, trace);
      try {
        sc.wind.trace = read_wind_csv(f.wind_trace_path);
      } catch (const std::exception& e) {
        r.fail(w->sub("trace_path"), e.what());
      }
    }
    w->finish();
  }

  if (auto l = o.child("wind_load")) {
    WindParams& wp = sc.wind_params;
    wp.air_density = l->positive("air_density_kgpm3", wp.air_density);
    wp.frontal_area = l->positive("frontal_area_m2", wp.frontal_area);
    wp.lateral_area = l->positive("lateral_area_m2", wp.lateral_area);
    wp.lateral_lever = l->num("lateral_lever_m", wp.lateral_lever);
    wp.c_x = l->num("cx", wp.c_x);
    wp.c_y = l->num("cy", wp.c_y);
    wp.c_z = l->num("cz", wp.c_z);
    l->finish();
  }

  if (auto c = o.child("current")) {
    CurrentParams& cp = sc.current;
    cp.speed = c->non_negative("speed_mps", cp.speed);
    cp.direction = deg2rad(c->num("direction_deg", rad2deg(cp.direction)));
    cp.modulation_amplitude = c->non_negative("modulation_amplitude_mps", cp.modulation_amplitude);
    cp.modulation_period = c->non_negative("modulation_period_s", cp.modulation_period);
    c->finish();
  }

  if (auto c = o.child("controller")) {
    ControllerConfig& cc = sc.controller;
    cc.kind = kind_from(r, c->sub("kind"), c->str("kind", std::string(to_string(cc.kind))));
    cc.feedforward = c->flag("feedforward", cc.feedforward);
    if (auto p = c->child("pd")) {
      cc.pd.kp = axes(*p, "kp", cc.pd.kp, kKp);
      cc.pd.kd = axes(*p, "kd", cc.pd.kd, kKd);
      p->finish();
    }
    if (auto b = c->child("backstepping")) {
      cc.backstepping.lambda = lambda_field(*b, cc.backstepping.lambda);
      cc.backstepping.kp = axes(*b, "kp", cc.backstepping.kp, kKp);
      cc.backstepping.kd = axes(*b, "kd", cc.backstepping.kd, kKd);
      b->finish();
    }
    if (auto s = c->child("sliding")) {
      cc.sliding.lambda = lambda_field(*s, cc.sliding.lambda);
      cc.sliding.R = axes(*s, "r", cc.sliding.R, kR);
      cc.sliding.E = axes(*s, "e", cc.sliding.E, kE);
      cc.sliding.antiwindup_scale = s->non_negative("antiwindup_scale", cc.sliding.antiwindup_scale);
      cc.antiwindup_on_dead_zone = s->flag("antiwindup_on_dead_zone", cc.antiwindup_on_dead_zone);
      s->finish();
    }
    c->finish();
  }

  if (auto s = o.child("simulation")) {
    read_simulation(*s, f.sim);
    s->finish();
  }
  o.finish();

  try {
    sc.validate();
    f.sim.validate();
  } catch (const std::exception& e) {
    r.fail({}, e.what());
  }
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.string(), path.parent_path());
}

std::string scenario_to_json(const ScenarioFile& f) {
  const Scenario& sc = f.scenario;
  ojson j;
  j["name"] = sc.name;
  j["hydro_nominal_speed_mps"] = f.hydro_nominal_speed;
  j["vehicle"] = ojson{{"mass_kg", sc.vehicle.mass},
                       {"inertia_z_kgm2", sc.vehicle.inertia_z},
                       {"thrust_forward_max_n", sc.vehicle.thrust_max},
                       {"thrust_reverse_max_n", sc.vehicle.thrust_reverse},
                       {"azimuth_limit_deg", rad2deg(sc.vehicle.azimuth_max)}};
  ojson weights = ojson::array();
  for (Eigen::Index i = 0; i < sc.allocator.weights.size(); ++i)
    weights.push_back(sc.allocator.weights(i));
  j["allocator"] = ojson{{"thrust_filter_s", sc.allocator.tau_thrust},
                         {"azimuth_filter_s", sc.allocator.tau_azimuth},
                         {"weights", weights}};
  j["setpoint"] = pose_json(sc.setpoint.eta_d);
  j["initial_offset"] = pose_json(sc.initial_offset);
  const WindSynthesisSpec& s = sc.wind.synthetic;
  ojson wind{{"model", wind_model_name(sc.wind.model)},
             {"mean_speed_mps", s.mean_speed},
             {"mean_direction_deg", rad2deg(s.mean_direction)},
             {"intensity", s.intensity},
             {"cutoff_hz", s.cutoff_hz},
             {"direction_std_deg", rad2deg(s.direction_std)}};
  if (sc.wind.model == WindModel::trace) wind["trace_path"] = f.wind_trace_path.generic_string();
  j["wind"] = wind;
  const WindParams& wp = sc.wind_params;
  j["wind_load"] = ojson{{"air_density_kgpm3", wp.air_density},
                         {"frontal_area_m2", wp.frontal_area},
                         {"lateral_area_m2", wp.lateral_area},
                         {"lateral_lever_m", wp.lateral_lever},
                         {"cx", wp.c_x},
                         {"cy", wp.c_y},
                         {"cz", wp.c_z}};
  j["current"] = ojson{{"speed_mps", sc.current.speed},
                       {"direction_deg", rad2deg(sc.current.direction)},
                       {"modulation_amplitude_mps", sc.current.modulation_amplitude},
                       {"modulation_period_s", sc.current.modulation_period}};
  const ControllerConfig& cc = sc.controller;
  j["controller"] = ojson{
      {"kind", std::string(to_string(cc.kind))},
      {"feedforward", cc.feedforward},
      {"pd", ojson{{"kp", axes_json(cc.pd.kp, kKp)}, {"kd", axes_json(cc.pd.kd, kKd)}}},
      {"backstepping", ojson{{"lambda_per_s", lambda_json(cc.backstepping.lambda)},
                             {"kp", axes_json(cc.backstepping.kp, kKp)},
                             {"kd", axes_json(cc.backstepping.kd, kKd)}}},
      {"sliding", ojson{{"lambda_per_s", lambda_json(cc.sliding.lambda)},
                        {"r", axes_json(cc.sliding.R, kR)},
                        {"e", axes_json(cc.sliding.E, kE)},
                        {"antiwindup_scale", cc.sliding.antiwindup_scale},
                        {"antiwindup_on_dead_zone", cc.antiwindup_on_dead_zone}}}};
  const SimConfig& sim = f.sim;
  j["simulation"] = ojson{
      {"dt_s", sim.dt},
      {"control_rate_hz", sim.control_rate},
      {"anemometer_rate_hz", sim.anemometer_rate},
      {"duration_s", sim.duration},
      {"seed", sim.seed},
      {"velocity_source",
       sim.velocity_source == VelocitySource::model ? "model" : "differentiated"},
      {"sensors", ojson{{"enabled", sim.sensors.enabled},
                        {"gps_resolution_m", sim.sensors.gps_resolution},
                        {"compass_resolution_deg", sim.sensors.compass_resolution},
                        {"anemometer_resolution_mps", sim.sensors.anemometer_resolution},
                        {"anemometer_max_mps", sim.sensors.anemometer_max}}}};
  return j.dump();
}

MatrixConfig parse_matrix(const std::string& text, const std::string& origin,
                          const std::filesystem::path& base_dir) {
  const Reader r(text, origin);
  const json root = r.parse();
  Obj o(r, root, {});
  MatrixConfig m;
  m.name = o.str("name", m.name);

  const json* sc = o.raw("scenarios");
  if (!sc) r.fail({"scenarios"}, "required");
  if (!sc->is_array() || sc->empty()) r.fail({"scenarios"}, "expected a non-empty array of paths");
  for (const auto& s : *sc) {
    if (!s.is_string()) r.fail({"scenarios"}, "expected a non-empty array of paths");
    m.scenario_paths.push_back(resolve(base_dir, s.get<std::string>()));
  }

  if (const json* c = o.raw("controllers")) {
    if (!c->is_array() || c->empty()) r.fail({"controllers"}, "expected a non-empty array");
    m.controllers.clear();
    for (const auto& k : *c) {
      if (!k.is_string()) r.fail({"controllers"}, "expected controller names");
      m.controllers.push_back(kind_from(r, {"controllers"}, k.get<std::string>()));
    }
  }
  if (const json* f = o.raw("feedforward")) {
    if (!f->is_array() || f->empty()) r.fail({"feedforward"}, "expected a non-empty array");
    m.feedforward.clear();
    for (const auto& b : *f) {
      if (!b.is_boolean()) r.fail({"feedforward"}, "expected true/false entries");
      m.feedforward.push_back(b.get<bool>());
    }
  }
  const json* seeds = o.raw("seeds");
  const bool has_count = o.has("seed_count");
  const std::uint64_t count = o.uint("seed_count", 0);
  const std::uint64_t first = o.uint("first_seed", 1);
  if (seeds && has_count) r.fail({"seed_count"}, "give either seeds or seed_count, not both");
  if (seeds) {
    if (!seeds->is_array() || seeds->empty()) r.fail({"seeds"}, "expected a non-empty array");
    m.seeds.clear();
    for (const auto& s : *seeds) {
      if (!s.is_number_unsigned()) r.fail({"seeds"}, "expected non-negative integers");
      m.seeds.push_back(s.get<std::uint64_t>());
    }
  } else if (has_count) {
    if (count == 0) r.fail({"seed_count"}, "must be at least 1");
    m.seeds.clear();
    for (std::uint64_t i = 0; i < count; ++i) m.seeds.push_back(first + i);
  }
  m.duration_override = o.non_negative("duration_s", 0.0);
  m.threads = static_cast<unsigned>(o.uint("threads", 0));
  o.finish();
  return m;
}

MatrixConfig load_matrix(const std::filesystem::path& path) {
  return parse_matrix(read_text_file(path), path.string(), path.parent_path());
}

WindgenConfig parse_windgen(const std::string& text, const std::string& origin) {
  const Reader r(text, origin);
  const json root = r.parse();
  Obj o(r, root, {});
  WindgenConfig w;
  WindSynthesisSpec& s = w.spec;
  s.mean_speed = o.non_negative("mean_speed_mps", s.mean_speed);
  s.mean_direction = deg2rad(o.num("mean_direction_deg", rad2deg(s.mean_direction)));
  s.intensity = o.non_negative("intensity", s.intensity);
  s.cutoff_hz = o.positive("cutoff_hz", s.cutoff_hz);
  s.direction_std = deg2rad(o.non_negative("direction_std_deg", rad2deg(s.direction_std)));
  s.duration = o.positive("duration_s", s.duration);
  s.dt = o.positive("dt_s", s.dt);
  s.seed = o.uint("seed", s.seed);
  o.finish();
  return w;
}

WindgenConfig load_windgen(const std::filesystem::path& path) {
  return parse_windgen(read_text_file(path), path.string());
}

}  // namespace usv
