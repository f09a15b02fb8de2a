// Thrust allocation for azimuthing thrusters: least-norm extended-thrust
// solution, reachable-angle logic, magnitude clamps and actuator filters.
#pragma once

#include "usv/vehicle.hpp"

#include <array>
#include <vector>

namespace usv {

struct ActuatorPosition {
  double l_x = 0.0;  // m, forward of CG
  double l_y = 0.0;  // m, starboard of CG
};

struct AllocatorConfig {
  std::vector<ActuatorPosition> positions;
  Eigen::VectorXd weights;           // diagonal of W, size 2 * positions
  double azimuth_limit = 0.7853981633974483;
  double thrust_forward_max = 127.0; // N per thruster
  double thrust_reverse_max = 51.0;  // N per thruster (magnitude)
  double tau_thrust = 5.0;           // s
  double tau_azimuth = 0.5;          // s

  // Port/starboard thrusters LCG aft of the CG, B/2 off the centerline,
  // identity weights, limits taken from the vehicle.
  static AllocatorConfig from(const VehicleParams& p);
  void validate() const;
};

// [Fxp, Fyp, Fxs, Fys]
using ExtendedThrust = Eigen::Vector4d;

Eigen::MatrixXd build_transformation(const AllocatorConfig& cfg);
// W^-1 T^T (T W^-1 T^T)^-1; throws ConfigError when the normal matrix is singular.
Eigen::MatrixXd weighted_pseudoinverse(const Eigen::MatrixXd& T, const Eigen::VectorXd& weights);

struct AngleLogicResult {
  double azimuth = 0.0;
  double thrust = 0.0;
  bool zeroed = false;
  bool operator==(const AngleLogicResult&) const = default;
};

// Pass within +-limit, zero thrust in the unreachable band, reverse thrust
// and shift by 180 deg when the opposite direction is reachable.
AngleLogicResult apply_angle_logic(double azimuth, double thrust, double limit);

struct AllocationResult {
  ThrusterSetpoint setpoint;
  ExtendedThrust raw = ExtendedThrust::Zero();
  bool saturated = false;
  std::array<bool, 2> zeroed{false, false};  // port, starboard
};

// Two-thruster allocation. Sides with no demand keep the azimuth of
// `previous` so the actuators do not slew back to zero.
AllocationResult allocate(const Wrench& tau, const AllocatorConfig& cfg,
                          const ThrusterSetpoint& previous = {});

// First-order IIR step y += (dt / tc) * (target - y); the gain is capped at 1.
double lowpass(double previous, double target, double dt, double time_constant);
// Same filter on an angle, stepping along the shorter arc.
double lowpass_angle(double previous, double target, double dt, double time_constant);

class ActuatorFilter {
 public:
  ActuatorFilter(double tau_thrust, double tau_azimuth, ThrusterSetpoint initial = {});
  const ThrusterSetpoint& step(const ThrusterSetpoint& target, double dt);
  const ThrusterSetpoint& output() const { return y_; }

 private:
  double tau_thrust_;
  double tau_azimuth_;
  ThrusterSetpoint y_;
};

}  // namespace usv
