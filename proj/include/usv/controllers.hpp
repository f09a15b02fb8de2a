// Station-keeping feedback laws. Each law maps the measured state and a
// constant pose setpoint to a desired body-frame wrench.
#pragma once

#include "usv/vehicle.hpp"

#include <string_view>
#include <variant>

namespace usv {

struct Setpoint {
  Vec3 eta_d = Vec3::Zero();      // [x_d, y_d, psi_d]
  Vec3 eta_d_dot = Vec3::Zero();  // zero for station keeping
};

struct TrackingError {
  Vec3 earth = Vec3::Zero();  // eta - eta_d, heading wrapped
  Vec3 body = Vec3::Zero();   // J(psi)^T * earth
};

TrackingError tracking_error(const VehicleState& state, const Setpoint& sp);
// eta_t_dot = J(psi) nu - eta_d_dot
Vec3 tracking_error_rate(const VehicleState& state, const Setpoint& sp);

struct PDGains {
  Vec3 kp{40.0, 40.0, 120.0};
  Vec3 kd{200.0, 200.0, 400.0};
  void validate() const;
};

Wrench pd_control(const VehicleState& state, const Setpoint& sp, const PDGains& gains);

struct LambdaSelection {
  double resonance = 0.0;      // (2/3) pi f_r
  double sampling = 0.0;       // f_s / 5
  double time_delay = 0.0;     // 1 / (3 t_u)
  double selected = 0.0;
  int selected_index = 0;      // 1, 2 or 3
};

LambdaSelection select_lambda(double f_r, double f_s, double t_u);

// Diagonal mass, drag and the matching Coriolis matrix used by the
// model-based laws (nonlinear drag and off-diagonal terms dropped).
struct SimplifiedModel {
  Mat3 M1 = Mat3::Identity();
  Mat3 D1 = Mat3::Zero();

  static SimplifiedModel from(const VehicleParams& p);
  Mat3 C1(const Vec3& nu) const;
};

// M1 [J^T eta_r_ddot + J_dot^T eta_r_dot] + C1(nu) J^T eta_r_dot + D1 J^T eta_r_dot
Vec3 model_compensation(const SimplifiedModel& model, const VehicleState& state,
                        const Vec3& eta_r_dot, const Vec3& eta_r_ddot);

struct BackstepGains {
  Vec3 lambda = Vec3::Constant(1.0 / 6.0);
  Vec3 kd{150.0, 150.0, 300.0};
  Vec3 kp{20.0, 20.0, 60.0};
  SimplifiedModel model;
  void validate() const;
};

struct BacksteppingTerms {
  Vec3 eta_r_dot = Vec3::Zero();
  Vec3 eta_r_ddot = Vec3::Zero();
  Vec3 surface = Vec3::Zero();
  Wrench tau;
};

BacksteppingTerms backstepping_terms(const VehicleState& state, const Setpoint& sp,
                                     const BackstepGains& gains);
Wrench backstepping_control(const VehicleState& state, const Setpoint& sp,
                            const BackstepGains& gains);

// Unit-slope saturation clipped at +-1.
double sat(double x);

struct SlidingGains {
  Vec3 lambda = Vec3::Constant(1.0 / 6.0);
  Vec3 R{90.0, 40.0, 35.0};          // N, N, N*m
  Vec3 E{0.25, 0.5, 0.25};           // boundary layer on s
  double antiwindup_scale = 0.1;     // applied to the sway integral
  SimplifiedModel model;
  void validate() const;
};

struct SlidingTerms {
  Vec3 integral_term = Vec3::Zero();  // integral of eta_t as used (after anti-windup)
  Vec3 eta_r_dot = Vec3::Zero();
  Vec3 eta_r_ddot = Vec3::Zero();
  Vec3 surface = Vec3::Zero();
  Vec3 switching = Vec3::Zero();      // R * sat(s / E)
  Wrench tau;
};

// Evaluates the sliding-mode law for a given error integral without touching
// any controller state.
SlidingTerms sliding_terms(const VehicleState& state, const Setpoint& sp,
                           const SlidingGains& gains, const Vec3& error_integral,
                           bool output_saturated);

class SlidingModeController {
 public:
  explicit SlidingModeController(SlidingGains gains);

  // Accumulates the error integral over dt, then evaluates the law.
  Wrench update(const VehicleState& state, const Setpoint& sp, double dt);
  // Whether the allocator clamped thrust on the previous cycle.
  void set_output_saturated(bool saturated) { saturated_ = saturated; }
  void reset();

  const Vec3& error_integral() const { return integral_; }
  const SlidingGains& gains() const { return gains_; }
  const SlidingTerms& last_terms() const { return last_; }

 private:
  SlidingGains gains_;
  Vec3 integral_ = Vec3::Zero();
  bool saturated_ = false;
  SlidingTerms last_;
};

Wrench apply_feedforward(const Wrench& tau, const Wrench& tau_wind_estimate);

enum class ControllerKind { pd, backstepping, sliding };

std::string_view to_string(ControllerKind k);
ControllerKind controller_kind_from_string(std::string_view s);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::sliding;
  PDGains pd;
  BackstepGains backstepping;
  SlidingGains sliding;
  bool feedforward = false;
  // Thrusters parked in the allocator dead zone also trigger anti-windup.
  bool antiwindup_on_dead_zone = true;
};

// One control loop's feedback law together with its internal state.
class StationKeepingController {
 public:
  StationKeepingController(const ControllerConfig& cfg, const VehicleParams& params);

  Wrench update(const VehicleState& state, const Setpoint& sp, double dt);
  void set_output_saturated(bool saturated);
  ControllerKind kind() const { return kind_; }

 private:
  ControllerKind kind_;
  std::variant<PDGains, BackstepGains, SlidingModeController> law_;
};

}  // namespace usv
