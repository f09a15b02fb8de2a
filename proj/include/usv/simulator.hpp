// Fixed-step closed-loop simulation of the station-keeping stack:
// sense -> feedback law -> optional wind feedforward -> allocate -> filter
// -> actuate -> integrate.
#pragma once

#include "usv/allocation.hpp"
#include "usv/controllers.hpp"
#include "usv/vehicle.hpp"
#include "usv/wind.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace usv {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SensorModels {
  bool enabled = false;              // false: perfect sensing
  double gps_resolution = 1.0;       // m
  double compass_resolution = 0.1;   // deg
  double anemometer_resolution = 0.1;  // m/s
  double anemometer_max = 40.0;        // m/s
  void validate() const;
};

enum class VelocitySource { model, differentiated };

struct SimConfig {
  double dt = 0.05;                // physics step, s
  double control_rate = 4.0;       // Hz
  double anemometer_rate = 1.0;    // Hz
  double duration = 700.0;         // s
  std::uint64_t seed = 1;
  SensorModels sensors;
  VelocitySource velocity_source = VelocitySource::model;

  void validate() const;
  int physics_steps_per_tick() const;
  int ticks_per_anemometer_sample() const;
  std::size_t tick_count() const;
};

enum class WindModel { none, synthetic, trace };

struct WindSpec {
  WindModel model = WindModel::none;
  WindSynthesisSpec synthetic;  // seed, duration and dt are filled from SimConfig
  WindSeries trace;
};

struct Scenario {
  std::string name = "scenario";
  VehicleParams vehicle = wamv16_params(kStationKeepingSpeed);
  Setpoint setpoint;
  Vec3 initial_offset = Vec3::Zero();  // added to the setpoint pose at t = 0
  WindSpec wind;
  WindParams wind_params;
  CurrentParams current;
  ControllerConfig controller;
  AllocatorConfig allocator = AllocatorConfig::from(wamv16_params(kStationKeepingSpeed));

  void validate() const;
};

struct LogRow {
  double t = 0.0;
  VehicleState truth;
  VehicleState sensed;
  Vec3 error = Vec3::Zero();  // eta - eta_d of the true state, heading wrapped
  Wrench tau;
  Wrench tau_wind_estimate;
  Wrench tau_command;  // tau minus the feedforward estimate when enabled
  ExtendedThrust extended = ExtendedThrust::Zero();
  ThrusterSetpoint commanded;  // after angle logic and clamps
  ThrusterSetpoint applied;    // after the actuator filters
  bool saturated = false;
  bool wind_fresh = false;     // an anemometer sample arrived this tick
  WindSample wind_raw;
  WindSample wind_filtered;
};

struct SimLog {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_echo;  // single-line JSON of the effective configuration
  std::vector<LogRow> rows;
};

using EnvironmentModel = std::function<Wrench(const VehicleState&)>;

// Classical RK4 step of the rigid-body model with heading renormalization.
// Throws SimulationError on a non-finite derivative or state.
VehicleState step(const VehicleParams& params, const VehicleState& state, const Wrench& tau,
                  const EnvironmentModel& environment, double dt);
VehicleState step(const VehicleParams& params, const VehicleState& state, const Wrench& tau,
                  double dt);

VehicleState sample_sensors(const VehicleState& truth, const SensorModels& models);
// Speed quantized and clamped to the instrument range; angle passed through.
WindSample sample_anemometer(const WindSample& apparent, const SensorModels& models);

// Hydrodynamic effect of a water current: drag evaluated on the
// water-relative velocity minus drag on the ground velocity.
Wrench relative_flow_wrench(const CurrentParams& cp, const VehicleState& state,
                            const VehicleParams& params, double t);

SimLog run_station_keeping(const Scenario& scenario, const SimConfig& config);

enum class Maneuver { bollard, acceleration, circle, zigzag };

Maneuver maneuver_from_string(const std::string& s);
std::string to_string(Maneuver m);

struct ManeuverParams {
  VehicleParams vehicle = wamv16_params();
  double throttle = 100.0;          // %, both motors during the run-up
  double accel_duration = 60.0;     // s at throttle
  double coast_duration = 60.0;     // s at 0 % (deceleration)
  double runup_duration = 20.0;     // s at 100/100 before circle or zigzag
  double circle_duration = 30.0;    // s at port/stbd circle commands
  double circle_port = -100.0;      // %
  double circle_stbd = 100.0;       // %
  int zigzag_legs_per_side = 4;
  double zigzag_leg_duration = 10.0;  // s
  double dt = 0.05;
  double log_rate = 4.0;            // Hz
};

SimLog run_sysid_maneuver(Maneuver kind, const ManeuverParams& params);

}  // namespace usv
