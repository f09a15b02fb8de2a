#include "usv/simulator.hpp"

#include "usv/angles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace usv {

namespace {

int integer_ratio(double ratio, const char* what) {
  const double r = std::round(ratio);
  if (r < 1.0 || std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError(std::string(what) + " must be an integer multiple");
  return static_cast<int>(r);
}

double quantize(double x, double step) { return step * std::round(x / step); }

std::string describe(const VehicleState& s) {
  std::ostringstream os;
  os << "eta=[" << s.eta.transpose() << "] nu=[" << s.nu.transpose() << "]";
  return os.str();
}

}  // namespace

void SensorModels::validate() const {
  if (!(gps_resolution > 0.0) || !(compass_resolution > 0.0) || !(anemometer_resolution > 0.0))
    throw ConfigError("sensors: resolutions must be positive");
  if (!(anemometer_max > 0.0)) throw ConfigError("sensors: anemometer range must be positive");
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sim: dt must be positive");
  if (!(duration > 0.0)) throw ConfigError("sim: duration must be positive");
  if (!(control_rate > 0.0) || control_rate > 1.0 / dt + 1e-9)
    throw ConfigError("sim: control rate must be positive and not exceed the physics rate");
  if (!(anemometer_rate > 0.0) || anemometer_rate > control_rate + 1e-9)
    throw ConfigError("sim: anemometer rate must be positive and not exceed the control rate");
  physics_steps_per_tick();
  ticks_per_anemometer_sample();
  sensors.validate();
}

int SimConfig::physics_steps_per_tick() const {
  return integer_ratio(1.0 / (control_rate * dt), "sim: control period / dt");
}

int SimConfig::ticks_per_anemometer_sample() const {
  return integer_ratio(control_rate / anemometer_rate, "sim: anemometer period / control period");
}

std::size_t SimConfig::tick_count() const {
  return static_cast<std::size_t>(std::llround(std::floor(duration * control_rate + 1e-9)));
}

void Scenario::validate() const {
  vehicle.validate();
  wind_params.validate();
  current.validate();
  allocator.validate();
  if (!setpoint.eta_d.allFinite() || !initial_offset.allFinite())
    throw ConfigError("scenario: setpoint and initial offset must be finite");
  if (wind.model == WindModel::trace && wind.trace.samples.size() < 2)
    throw ConfigError("scenario: wind trace has fewer than two samples");
  switch (controller.kind) {
    case ControllerKind::pd: controller.pd.validate(); break;
    case ControllerKind::backstepping: controller.backstepping.validate(); break;
    case ControllerKind::sliding: controller.sliding.validate(); break;
  }
}

VehicleState step(const VehicleParams& p, const VehicleState& s, const Wrench& tau,
                  const EnvironmentModel& env, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  auto deriv = [&](const VehicleState& x) {
    const Wrench e = env ? env(x) : Wrench{};
    StateDerivative d = state_derivative(p, x, tau, e);
    if (!d.eta_dot.allFinite() || !d.nu_dot.allFinite())
      throw SimulationError("non-finite state derivative at " + describe(x));
    return d;
  };
  auto advance = [&](const StateDerivative& d, double h) {
    VehicleState x = s;
    x.eta += h * d.eta_dot;
    x.nu += h * d.nu_dot;
    return x;
  };
  const StateDerivative k1 = deriv(s);
  const StateDerivative k2 = deriv(advance(k1, dt / 2.0));
  const StateDerivative k3 = deriv(advance(k2, dt / 2.0));
  const StateDerivative k4 = deriv(advance(k3, dt));

  VehicleState next = s;
  next.eta += dt / 6.0 * (k1.eta_dot + 2.0 * k2.eta_dot + 2.0 * k3.eta_dot + k4.eta_dot);
  next.nu += dt / 6.0 * (k1.nu_dot + 2.0 * k2.nu_dot + 2.0 * k3.nu_dot + k4.nu_dot);
  next.eta(2) = wrap_angle(next.eta(2));
  if (!next.finite()) throw SimulationError("non-finite state after step: " + describe(next));
  return next;
}

VehicleState step(const VehicleParams& p, const VehicleState& s, const Wrench& tau, double dt) {
  return step(p, s, tau, EnvironmentModel{}, dt);
}

VehicleState sample_sensors(const VehicleState& truth, const SensorModels& m) {
  if (!m.enabled) return truth;
  VehicleState sensed = truth;
  sensed.eta(0) = quantize(truth.eta(0), m.gps_resolution);
  sensed.eta(1) = quantize(truth.eta(1), m.gps_resolution);
  sensed.eta(2) = wrap_angle(deg2rad(quantize(rad2deg(truth.eta(2)), m.compass_resolution)));
  return sensed;
}

WindSample sample_anemometer(const WindSample& apparent, const SensorModels& m) {
  if (!m.enabled) return apparent;
  WindSample s = apparent;
  s.speed = std::clamp(quantize(apparent.speed, m.anemometer_resolution), 0.0, m.anemometer_max);
  return s;
}

Wrench relative_flow_wrench(const CurrentParams& cp, const VehicleState& state,
                            const VehicleParams& params, double t) {
  const double c = cp.speed_at(t);
  if (c == 0.0) return {};
  const Vec3 flow_earth(c * std::cos(cp.direction), c * std::sin(cp.direction), 0.0);
  const Vec3 flow_body = rotation_matrix(state.eta(2)).transpose() * flow_earth;
  return drag_wrench(params, state.nu) - drag_wrench(params, state.nu - flow_body);
}

SimLog run_station_keeping(const Scenario& sc, const SimConfig& cfg) {
  sc.validate();
  cfg.validate();

  const int steps_per_tick = cfg.physics_steps_per_tick();
  const int ticks_per_wind = cfg.ticks_per_anemometer_sample();
  const double control_dt = steps_per_tick * cfg.dt;
  const std::size_t ticks = cfg.tick_count();

  WindSeries wind;
  switch (sc.wind.model) {
    case WindModel::none: break;
    case WindModel::synthetic: {
      WindSynthesisSpec spec = sc.wind.synthetic;
      spec.seed = cfg.seed;
      spec.duration = cfg.duration;
      spec.dt = cfg.dt;
      wind = synthesize_wind(spec);
      break;
    }
    case WindModel::trace: wind = sc.wind.trace; break;
  }
  const bool has_wind = !wind.samples.empty();

  StationKeepingController controller(sc.controller, sc.vehicle);
  ActuatorFilter actuators(sc.allocator.tau_thrust, sc.allocator.tau_azimuth);
  AnemometerFilter anemometer;

  VehicleState truth;
  truth.eta = sc.setpoint.eta_d + sc.initial_offset;
  truth.eta(2) = wrap_angle(truth.eta(2));

  SimLog log;
  log.scenario = sc.name;
  log.seed = cfg.seed;
  log.rows.reserve(ticks);

  WindSample wind_raw, wind_filtered;
  Wrench tau_wind_estimate;
  ThrusterSetpoint commanded;
  VehicleState prev_sensed;
  bool saturated = false;
  std::size_t physics_step = 0;

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * control_dt;
    LogRow row;
    row.t = t;
    row.truth = truth;

    if (k % static_cast<std::size_t>(ticks_per_wind) == 0) {
      const TrueWind w = has_wind ? wind.at(t) : TrueWind{};
      WindSample apparent = apparent_from_true(w, truth);
      apparent.t = t;
      wind_raw = sample_anemometer(apparent, cfg.sensors);
      wind_filtered = anemometer.push(wind_raw);
      tau_wind_estimate = wind_wrench(sc.wind_params, wind_filtered);
      row.wind_fresh = true;
    }
    row.wind_raw = wind_raw;
    row.wind_filtered = wind_filtered;

    VehicleState sensed = sample_sensors(truth, cfg.sensors);
    if (cfg.velocity_source == VelocitySource::differentiated) {
      Vec3 eta_dot = Vec3::Zero();
      if (k > 0) {
        eta_dot = (sensed.eta - prev_sensed.eta) / control_dt;
        eta_dot(2) = wrap_angle(sensed.eta(2) - prev_sensed.eta(2)) / control_dt;
      }
      prev_sensed = sensed;
      sensed.nu = rotation_matrix(sensed.eta(2)).transpose() * eta_dot;
      sensed.nu(2) = eta_dot(2);
    }
    row.sensed = sensed;
    row.error = tracking_error(truth, sc.setpoint).earth;

    controller.set_output_saturated(saturated);
    row.tau = controller.update(sensed, sc.setpoint, control_dt);
    row.tau_wind_estimate = tau_wind_estimate;
    row.tau_command = sc.controller.feedforward ? apply_feedforward(row.tau, tau_wind_estimate)
                                                : row.tau;

    const AllocationResult alloc = allocate(row.tau_command, sc.allocator, actuators.output());
    saturated = alloc.saturated || (sc.controller.antiwindup_on_dead_zone &&
                                    (alloc.zeroed[0] || alloc.zeroed[1]));
    commanded = alloc.setpoint;
    row.extended = alloc.raw;
    row.commanded = commanded;
    row.saturated = alloc.saturated;
    row.applied = actuators.step(commanded, control_dt);

    const Wrench thrust = propulsion_wrench(sc.vehicle, row.applied);
    log.rows.push_back(row);

    for (int i = 0; i < steps_per_tick; ++i, ++physics_step) {
      const double ts = static_cast<double>(physics_step) * cfg.dt;
      const TrueWind w = has_wind ? wind.at(ts) : TrueWind{};
      EnvironmentModel env = [&](const VehicleState& x) {
        Wrench e = relative_flow_wrench(sc.current, x, sc.vehicle, ts);
        if (has_wind) e = e + wind_wrench(sc.wind_params, apparent_from_true(w, x));
        return e;
      };
      try {
        truth = step(sc.vehicle, truth, thrust, env, cfg.dt);
      } catch (const SimulationError& err) {
        std::ostringstream os;
        os << "run '" << sc.name << "' seed " << cfg.seed << " aborted at t=" << ts << ": "
           << err.what();
        throw SimulationError(os.str());
      }
    }
  }
  return log;
}

Maneuver maneuver_from_string(const std::string& s) {
  if (s == "bollard") return Maneuver::bollard;
  if (s == "acceleration") return Maneuver::acceleration;
  if (s == "circle") return Maneuver::circle;
  if (s == "zigzag") return Maneuver::zigzag;
  throw ConfigError("unknown maneuver '" + s + "' (expected bollard, acceleration, circle or zigzag)");
}

std::string to_string(Maneuver m) {
  switch (m) {
    case Maneuver::bollard: return "bollard";
    case Maneuver::acceleration: return "acceleration";
    case Maneuver::circle: return "circle";
    case Maneuver::zigzag: return "zigzag";
  }
  return "?";
}

namespace {

struct ThrottlePhase {
  double duration;
  double port;  // %
  double stbd;  // %
};

std::vector<ThrottlePhase> schedule(Maneuver kind, const ManeuverParams& p) {
  switch (kind) {
    case Maneuver::acceleration:
      return {{p.accel_duration, p.throttle, p.throttle}, {p.coast_duration, 0.0, 0.0}};
    case Maneuver::circle:
      return {{p.runup_duration, 100.0, 100.0}, {p.circle_duration, p.circle_port, p.circle_stbd}};
    case Maneuver::zigzag: {
      std::vector<ThrottlePhase> out{{p.runup_duration, 100.0, 100.0}};
      for (int i = 0; i < p.zigzag_legs_per_side; ++i) {
        out.push_back({p.zigzag_leg_duration, 100.0, 0.0});
        out.push_back({p.zigzag_leg_duration, 0.0, 100.0});
      }
      return out;
    }
    case Maneuver::bollard: break;
  }
  return {};
}

}  // namespace

SimLog run_sysid_maneuver(Maneuver kind, const ManeuverParams& p) {
  p.vehicle.validate();
  if (!(p.dt > 0.0) || !(p.log_rate > 0.0)) throw ConfigError("sysid: dt and log rate must be positive");
  if (!(p.throttle >= -100.0 && p.throttle <= 100.0))
    throw ConfigError("sysid: throttle must lie in [-100, 100] %");

  SimLog log;
  log.scenario = "sysid-" + to_string(kind);

  if (kind == Maneuver::bollard) {
    // Vehicle restrained: one row per calibration command, both motors equal.
    double t = 0.0;
    for (const auto& knot : thrust_calibration_table()) {
      LogRow row;
      row.t = t;
      t += 1.0;
      const double per_side = thrust_from_command(knot.command) / 2.0;
      row.applied = {per_side, per_side, 0.0, 0.0};
      row.commanded = row.applied;
      row.tau = propulsion_wrench(p.vehicle, row.applied);
      row.tau_command = row.tau;
      log.rows.push_back(row);
    }
    return log;
  }

  const int steps_per_log = integer_ratio(1.0 / (p.log_rate * p.dt), "sysid: log period / dt");
  VehicleState state;
  std::size_t n = 0;
  for (const ThrottlePhase& phase : schedule(kind, p)) {
    ThrusterSetpoint sp{thrust_from_command(phase.port) / 2.0, thrust_from_command(phase.stbd) / 2.0,
                        0.0, 0.0};
    const Wrench tau = propulsion_wrench(p.vehicle, sp);
    const auto steps = static_cast<std::size_t>(std::llround(phase.duration / p.dt));
    for (std::size_t i = 0; i < steps; ++i, ++n) {
      if (n % static_cast<std::size_t>(steps_per_log) == 0) {
        LogRow row;
        row.t = static_cast<double>(n) * p.dt;
        row.truth = state;
        row.sensed = state;
        row.commanded = sp;
        row.applied = sp;
        row.tau = tau;
        row.tau_command = tau;
        row.error = state.eta;
        log.rows.push_back(row);
      }
      state = step(p.vehicle, state, tau, p.dt);
    }
  }
  return log;
}

}  // namespace usv
