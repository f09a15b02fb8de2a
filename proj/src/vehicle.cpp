#include "usv/vehicle.hpp"

#include "usv/angles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace usv {

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError("vehicle: mass must be positive");
  if (!(inertia_z > 0.0)) throw ConfigError("vehicle: inertia_z must be positive");
  if (!(thrust_max > 0.0)) throw ConfigError("vehicle: thrust_max must be positive");
  if (!(thrust_reverse >= 0.0)) throw ConfigError("vehicle: thrust_reverse must be non-negative");
  if (!(azimuth_max > 0.0 && azimuth_max <= kPi / 2.0 + 1e-12))
    throw ConfigError("vehicle: azimuth_max must lie in (0, pi/2]");
  if (!(draft > 0.0) || !(length_waterline > 0.0))
    throw ConfigError("vehicle: draft and waterline length must be positive");
}

HydroCoefficients estimate_hydro_coefficients(const VehicleParams& g, double U,
                                              double nrdot_end_constant) {
  if (!(g.draft > 0.0) || !(g.length_waterline > 0.0) || !(g.hull_beam > 0.0))
    throw ConfigError("hydro estimate: draft, waterline length and hull beam must be positive");
  if (!(U >= 0.0)) throw ConfigError("hydro estimate: nominal speed must be non-negative");

  const double rho = g.water_density;
  const double T = g.draft;
  const double L = g.length_waterline;
  const double B = g.hull_separation;
  const double lcg = g.lcg;
  const double fore = L - lcg;
  const double strip = kPi * rho * T * T;  // pi rho T^2

  HydroCoefficients c;
  c.X_udot = -0.05 * g.mass;
  c.Y_vdot = 0.9 * strip * L;
  c.N_rdot = 1.2 * (nrdot_end_constant * kPi * rho * (B / 2.0) * std::pow(T, 4) +
                    strip * (fore * fore * fore + lcg * lcg * lcg) / 3.0);
  c.Y_rdot = 0.5 * strip * (fore * fore + lcg * lcg) / 2.0;
  c.N_vdot = c.Y_rdot;

  const double bt = g.hull_beam / T;
  c.Y_v = -0.5 * rho * U * (1.1 + 0.0045 * L / T - 0.1 * bt + 0.016 * bt * bt) *
          (kPi * T * L / 2.0);
  c.N_r = -0.65 * strip * U * L * L;
  c.Y_r = -0.4 * strip * U * L;
  return c;
}

void apply_hydro_coefficients(VehicleParams& p, const HydroCoefficients& c) {
  p.X_udot = -std::abs(c.X_udot);
  p.Y_vdot = -std::abs(c.Y_vdot);
  p.N_rdot = -std::abs(c.N_rdot);
  p.Y_rdot = -std::abs(c.Y_rdot);
  p.N_vdot = -std::abs(c.N_vdot);
  p.Y_v = std::abs(c.Y_v);
  p.N_r = std::abs(c.N_r);
  p.Y_r = std::abs(c.Y_r);
  p.N_v = 0.0;
}

VehicleParams wamv16_params(double nominal_speed) {
  VehicleParams p;
  apply_hydro_coefficients(p, estimate_hydro_coefficients(p, nominal_speed));
  return p;
}

Mat3 rotation_matrix(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 J;
  J << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return J;
}

Mat3 rotation_matrix_rate(double psi, double r) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 Jd;
  Jd << -s * r, -c * r, 0.0,
        c * r, -s * r, 0.0,
        0.0, 0.0, 0.0;
  return Jd;
}

Mat3 mass_matrix(const VehicleParams& p) {
  if (!(p.mass > 0.0)) throw ConfigError("mass matrix: mass must be positive");
  if (!(p.inertia_z > 0.0)) throw ConfigError("mass matrix: inertia_z must be positive");
  const double m = p.mass;
  Mat3 M;
  M << m - p.X_udot, 0.0, -m * p.y_g,
       0.0, m - p.Y_vdot, m * p.x_g - p.Y_rdot,
       -m * p.y_g, m * p.x_g - p.N_vdot, p.inertia_z - p.N_rdot;
  return M;
}

Mat3 coriolis_matrix(const VehicleParams& p, const Vec3& nu) {
  const double m = p.mass;
  const double u = nu(0), v = nu(1), r = nu(2);
  Mat3 rb;
  rb << 0.0, 0.0, -m * (p.x_g * r + v),
        0.0, 0.0, -m * (p.y_g * r - u),
        m * (p.x_g * r + v), m * (p.y_g * r - u), 0.0;
  const double a13 = p.Y_vdot * v + 0.5 * (p.Y_rdot + p.N_vdot) * r;
  const double a23 = -p.X_udot * u;
  Mat3 am;
  am << 0.0, 0.0, a13,
        0.0, 0.0, a23,
        -a13, -a23, 0.0;
  return rb + am;
}

Mat3 linear_drag_matrix(const VehicleParams& p) {
  Mat3 D;
  D << p.X_u, 0.0, 0.0,
       0.0, p.Y_v, p.Y_r,
       0.0, p.N_v, p.N_r;
  return D;
}

namespace {

double hull_drag(const VehicleParams& p, double u_hull) {
  return 0.5 * p.X_uu * std::abs(u_hull) * u_hull + 0.5 * p.X_u * u_hull;
}

}  // namespace

Wrench drag_wrench(const VehicleParams& p, const Vec3& nu) {
  const double u = nu(0), v = nu(1), r = nu(2);
  const double av = std::abs(v), ar = std::abs(r);

  // sway/yaw rows of D_l + D_nl
  const double d22 = p.Y_v + p.Y_vv * av + p.Y_vr * ar;
  const double d23 = p.Y_r + p.Y_rv * av + p.Y_rr * ar;
  const double d32 = p.N_v + p.N_vv * av + p.N_vr * ar;
  const double d33 = p.N_r + p.N_rv * av + p.N_rr * ar;

  // surge from the two hulls, plus the yaw moment of their imbalance
  const double half_b = p.hull_separation / 2.0;
  const double d_port = hull_drag(p, u - r * half_b);
  const double d_stbd = hull_drag(p, u + r * half_b);

  return {d_port + d_stbd, d22 * v + d23 * r,
          d32 * v + d33 * r + (d_stbd - d_port) * half_b};
}

Wrench propulsion_wrench(const VehicleParams& p, const ThrusterSetpoint& sp) {
  constexpr double kSlack = 1e-12;
  if (std::abs(sp.azimuth_port) > p.azimuth_max + kSlack ||
      std::abs(sp.azimuth_stbd) > p.azimuth_max + kSlack)
    throw std::invalid_argument("propulsion_wrench: azimuth beyond actuator limit");

  const double fxp = sp.thrust_port * std::cos(sp.azimuth_port);
  const double fyp = sp.thrust_port * std::sin(sp.azimuth_port);
  const double fxs = sp.thrust_stbd * std::cos(sp.azimuth_stbd);
  const double fys = sp.thrust_stbd * std::sin(sp.azimuth_stbd);

  // r x F (z component) with r_p = (-LCG, -B/2), r_s = (-LCG, +B/2)
  const double half_b = p.hull_separation / 2.0;
  const double mz = (-p.lcg * fyp - (-half_b) * fxp) + (-p.lcg * fys - half_b * fxs);
  return {fxp + fxs, fyp + fys, mz};
}

namespace {

// Bollard-pull samples plus the (0 %, 0 N) dead-band anchor.
constexpr std::array<CalibrationKnot, 18> kCalibration{{
    {-100, -102}, {-90, -84}, {-80, -66}, {-70, -44}, {-60, -31}, {-50, -13},
    {-40, -9},    {-30, -4},  {0, 0},     {20, 29},   {30, 34},   {40, 78},
    {50, 110},    {60, 144},  {70, 175},  {80, 203},  {90, 228},  {100, 254},
}};

}  // namespace

std::span<const CalibrationKnot> thrust_calibration_table() { return kCalibration; }

double thrust_from_command(double cmd) {
  if (!(cmd >= -100.0 && cmd <= 100.0))
    throw std::out_of_range("thrust_from_command: command outside [-100, 100] %");
  auto hi = std::lower_bound(kCalibration.begin(), kCalibration.end(), cmd,
                             [](const CalibrationKnot& k, double c) { return k.command < c; });
  if (hi->command == cmd) return hi->thrust;
  auto lo = hi - 1;
  const double t = (cmd - lo->command) / (hi->command - lo->command);
  return lo->thrust + t * (hi->thrust - lo->thrust);
}

StateDerivative state_derivative(const VehicleParams& p, const VehicleState& s,
                                 const Wrench& tau, const Wrench& tau_env) {
  const Mat3 M = mass_matrix(p);
  Eigen::FullPivLU<Mat3> lu(M);
  if (!lu.isInvertible()) throw ConfigError("state_derivative: singular mass matrix");

  const Vec3 rhs = tau.vec() + tau_env.vec() - coriolis_matrix(p, s.nu) * s.nu -
                   drag_wrench(p, s.nu).vec();
  StateDerivative d;
  d.nu_dot = lu.solve(rhs);
  d.eta_dot = rotation_matrix(s.eta(2)) * s.nu;
  return d;
}

double kinetic_energy(const VehicleParams& p, const Vec3& nu) {
  return 0.5 * nu.dot(mass_matrix(p) * nu);
}

}  // namespace usv
