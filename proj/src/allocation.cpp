#include "usv/allocation.hpp"

#include "usv/angles.hpp"

#include <algorithm>
#include <cmath>

namespace usv {

AllocatorConfig AllocatorConfig::from(const VehicleParams& p) {
  AllocatorConfig cfg;
  cfg.positions = {{-p.lcg, -p.hull_separation / 2.0}, {-p.lcg, p.hull_separation / 2.0}};
  cfg.weights = Eigen::VectorXd::Ones(4);
  cfg.azimuth_limit = p.azimuth_max;
  cfg.thrust_forward_max = p.thrust_max;
  cfg.thrust_reverse_max = p.thrust_reverse;
  return cfg;
}

void AllocatorConfig::validate() const {
  if (positions.empty()) throw ConfigError("allocator: at least one actuator required");
  if (weights.size() != static_cast<Eigen::Index>(2 * positions.size()))
    throw ConfigError("allocator: weight vector must have two entries per actuator");
  if (!(weights.array() > 0.0).all()) throw ConfigError("allocator: weights must be positive");
  if (!(azimuth_limit > 0.0 && azimuth_limit <= kPi / 2.0 + 1e-12))
    throw ConfigError("allocator: azimuth limit must lie in (0, pi/2]");
  if (!(thrust_forward_max > 0.0) || !(thrust_reverse_max >= 0.0))
    throw ConfigError("allocator: thrust limits must be positive");
  if (!(tau_thrust > 0.0) || !(tau_azimuth > 0.0))
    throw ConfigError("allocator: filter time constants must be positive");
}

Eigen::MatrixXd build_transformation(const AllocatorConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(cfg.positions.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(3, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& pos = cfg.positions[static_cast<std::size_t>(i)];
    T(0, 2 * i) = 1.0;
    T(1, 2 * i + 1) = 1.0;
    T(2, 2 * i) = -pos.l_y;
    T(2, 2 * i + 1) = pos.l_x;
  }
  return T;
}

Eigen::MatrixXd weighted_pseudoinverse(const Eigen::MatrixXd& T, const Eigen::VectorXd& weights) {
  if (weights.size() != T.cols()) throw ConfigError("pseudoinverse: weight size mismatch");
  const Eigen::MatrixXd Winv_Tt = weights.cwiseInverse().asDiagonal() * T.transpose();
  const Eigen::MatrixXd normal = T * Winv_Tt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw ConfigError("allocator geometry is degenerate: T W^-1 T^T is singular");
  return Winv_Tt * lu.inverse();
}

AngleLogicResult apply_angle_logic(double azimuth, double thrust, double limit) {
  const double a = std::abs(azimuth);
  const double sign = azimuth < 0.0 ? -1.0 : 1.0;
  if (a <= limit) return {azimuth, thrust, false};
  if (a < kPi - limit) return {sign * limit, 0.0, true};
  return {azimuth - sign * kPi, -thrust, false};
}

AllocationResult allocate(const Wrench& tau, const AllocatorConfig& cfg,
                          const ThrusterSetpoint& previous) {
  const Eigen::MatrixXd T = build_transformation(cfg);
  const Eigen::MatrixXd pinv = weighted_pseudoinverse(T, cfg.weights);

  AllocationResult out;
  out.raw = pinv * tau.vec();

  constexpr double kNoDemand = 1e-9;
  const double prev_az[2] = {previous.azimuth_port, previous.azimuth_stbd};
  double thrust[2], azimuth[2];
  for (int side = 0; side < 2; ++side) {
    const double fx = out.raw(2 * side), fy = out.raw(2 * side + 1);
    const double mag = std::hypot(fx, fy);
    if (mag < kNoDemand) {
      thrust[side] = 0.0;
      azimuth[side] = std::clamp(prev_az[side], -cfg.azimuth_limit, cfg.azimuth_limit);
      continue;
    }
    const AngleLogicResult logic = apply_angle_logic(std::atan2(fy, fx), mag, cfg.azimuth_limit);
    out.zeroed[static_cast<std::size_t>(side)] = logic.zeroed;
    azimuth[side] = logic.azimuth;
    double t = logic.thrust;
    if (t > cfg.thrust_forward_max) {
      t = cfg.thrust_forward_max;
      out.saturated = true;
    } else if (t < -cfg.thrust_reverse_max) {
      t = -cfg.thrust_reverse_max;
      out.saturated = true;
    }
    thrust[side] = t;
  }
  out.setpoint = {thrust[0], thrust[1], azimuth[0], azimuth[1]};
  return out;
}

double lowpass(double previous, double target, double dt, double tc) {
  const double alpha = std::min(1.0, dt / tc);
  return previous + alpha * (target - previous);
}

double lowpass_angle(double previous, double target, double dt, double tc) {
  const double alpha = std::min(1.0, dt / tc);
  return wrap_angle(previous + alpha * wrap_angle(target - previous));
}

ActuatorFilter::ActuatorFilter(double tau_thrust, double tau_azimuth, ThrusterSetpoint initial)
    : tau_thrust_(tau_thrust), tau_azimuth_(tau_azimuth), y_(initial) {}

const ThrusterSetpoint& ActuatorFilter::step(const ThrusterSetpoint& target, double dt) {
  y_.thrust_port = lowpass(y_.thrust_port, target.thrust_port, dt, tau_thrust_);
  y_.thrust_stbd = lowpass(y_.thrust_stbd, target.thrust_stbd, dt, tau_thrust_);
  y_.azimuth_port = lowpass_angle(y_.azimuth_port, target.azimuth_port, dt, tau_azimuth_);
  y_.azimuth_stbd = lowpass_angle(y_.azimuth_stbd, target.azimuth_stbd, dt, tau_azimuth_);
  return y_;
}

}  // namespace usv
