// Planar (surge, sway, yaw) model of a twin-hull USV with two azimuthing
// thrusters mounted aft of the center of gravity.
//
// Sign conventions:
//  * Earth frame is North-East-Down, pose eta = [x North, y East, psi].
//  * Body velocity nu = [u surge, v sway, r yaw rate].
//  * Added-mass derivatives follow SNAME (negative for a normal hull), so
//    M = M_RB - diag(X_udot, Y_vdot, N_rdot) adds inertia.
//  * Drag coefficients are stored as positive dissipation: the drag wrench
//    sits on the left of M nu_dot + C(nu) nu + D(nu) nu = tau + tau_w.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <stdexcept>

namespace usv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generalized planar force [X, Y, N].
struct Wrench {
  double x = 0.0;  // N
  double y = 0.0;  // N
  double n = 0.0;  // N*m

  Vec3 vec() const { return {x, y, n}; }
  static Wrench from(const Vec3& v) { return {v(0), v(1), v(2)}; }

  Wrench operator+(const Wrench& o) const { return {x + o.x, y + o.y, n + o.n}; }
  Wrench operator-(const Wrench& o) const { return {x - o.x, y - o.y, n - o.n}; }
  Wrench operator*(double k) const { return {x * k, y * k, n * k}; }
  bool operator==(const Wrench&) const = default;
};

struct VehicleState {
  Vec3 eta = Vec3::Zero();  // [x, y, psi]
  Vec3 nu = Vec3::Zero();   // [u, v, r]

  bool finite() const { return eta.allFinite() && nu.allFinite(); }
};

struct StateDerivative {
  Vec3 eta_dot = Vec3::Zero();
  Vec3 nu_dot = Vec3::Zero();
};

// Per-side thrust (signed, reverse negative) and azimuth.
struct ThrusterSetpoint {
  double thrust_port = 0.0;
  double thrust_stbd = 0.0;
  double azimuth_port = 0.0;
  double azimuth_stbd = 0.0;

  bool operator==(const ThrusterSetpoint&) const = default;
};

struct VehicleParams {
  // rigid body
  double mass = 180.0;
  double inertia_z = 250.0;
  double x_g = 0.0;
  double y_g = 0.0;

  // geometry (Table-1 style particulars)
  double length_overall = 4.05;
  double length_waterline = 3.20;
  double draft = 0.23;
  double hull_beam = 0.61;       // single pontoon beam
  double hull_separation = 1.83; // centerline-to-centerline, B
  double lcg = 1.30;             // CG forward of the thruster plane
  double water_density = 1025.0;

  // added mass (SNAME signs)
  double X_udot = 0.0;
  double Y_vdot = 0.0;
  double Y_rdot = 0.0;
  double N_vdot = 0.0;
  double N_rdot = 0.0;

  // linear drag (positive = dissipative)
  double X_u = 33.9;
  double Y_v = 0.0;
  double Y_r = 0.0;
  double N_v = 0.0;
  double N_r = 0.0;

  // quadratic drag (positive = dissipative)
  double X_uu = 90.3;
  double Y_vv = 0.0;
  double Y_vr = 0.0;
  double Y_rv = 0.0;
  double Y_rr = 0.0;
  double N_vv = 0.0;
  double N_vr = 0.0;
  double N_rv = 0.0;
  double N_rr = 0.0;

  // actuators
  double thrust_max = 127.0;      // forward, per thruster
  double thrust_reverse = 51.0;   // reverse magnitude, per thruster
  double azimuth_max = 0.7853981633974483;

  // Throws ConfigError when a physical invariant is violated.
  void validate() const;
};

// Dimensional coefficients as evaluated from the empirical formulas, in the
// sign the formulas produce (factor times dimensional term).
struct HydroCoefficients {
  double X_udot = 0.0;
  double Y_vdot = 0.0;
  double N_rdot = 0.0;
  double Y_rdot = 0.0;
  double N_vdot = 0.0;
  double Y_v = 0.0;
  double N_r = 0.0;
  double Y_r = 0.0;
};

// The first constant in the N_rdot strip-theory term, kept configurable.
inline constexpr double kNrdotEndConstant = 4.75 / 2.0;

HydroCoefficients estimate_hydro_coefficients(const VehicleParams& geometry,
                                              double nominal_speed,
                                              double nrdot_end_constant = kNrdotEndConstant);

// Writes estimated coefficients into params using the storage conventions
// above (added-mass derivatives negative, drag positive).
void apply_hydro_coefficients(VehicleParams& params, const HydroCoefficients& c);

// Particulars of the 16 ft WAM-V with coefficients linearized at
// `nominal_speed` (m/s) and the surge drag fit.
VehicleParams wamv16_params(double nominal_speed = 1.0);

// Linearization speed used for station keeping, where the vessel hovers near rest.
inline constexpr double kStationKeepingSpeed = 0.2;

Mat3 rotation_matrix(double psi);
// dJ/dt for yaw rate r.
Mat3 rotation_matrix_rate(double psi, double r);

Mat3 mass_matrix(const VehicleParams& p);
Mat3 coriolis_matrix(const VehicleParams& p, const Vec3& nu);

// Linear drag matrix D_l (sway/yaw block; surge entry X_u).
Mat3 linear_drag_matrix(const VehicleParams& p);

Wrench drag_wrench(const VehicleParams& p, const Vec3& nu);
Wrench propulsion_wrench(const VehicleParams& p, const ThrusterSetpoint& sp);

// Bollard-pull calibration: total thrust of both motors for a motor command
// in percent.
double thrust_from_command(double command_percent);

struct CalibrationKnot {
  double command;  // %
  double thrust;   // N, both motors
};
std::span<const CalibrationKnot> thrust_calibration_table();

StateDerivative state_derivative(const VehicleParams& p, const VehicleState& s,
                                 const Wrench& tau, const Wrench& tau_env);

double kinetic_energy(const VehicleParams& p, const Vec3& nu);

}  // namespace usv
