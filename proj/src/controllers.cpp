#include "usv/controllers.hpp"

#include "usv/angles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace usv {

namespace {

void require_positive(const Vec3& v, const char* what) {
  if (!(v.array() > 0.0).all() || !v.allFinite())
    throw ConfigError(std::string(what) + " entries must be positive");
}

}  // namespace

TrackingError tracking_error(const VehicleState& state, const Setpoint& sp) {
  TrackingError e;
  e.earth = state.eta - sp.eta_d;
  e.earth(2) = wrap_angle(e.earth(2));
  e.body = rotation_matrix(state.eta(2)).transpose() * e.earth;
  return e;
}

Vec3 tracking_error_rate(const VehicleState& state, const Setpoint& sp) {
  return rotation_matrix(state.eta(2)) * state.nu - sp.eta_d_dot;
}

void PDGains::validate() const {
  require_positive(kp, "PD kp");
  require_positive(kd, "PD kd");
}

Wrench pd_control(const VehicleState& state, const Setpoint& sp, const PDGains& g) {
  const double psi = state.eta(2);
  const Mat3 J = rotation_matrix(psi);
  const Mat3 Jd = rotation_matrix_rate(psi, state.nu(2));
  const TrackingError e = tracking_error(state, sp);
  const Vec3 e_dot = tracking_error_rate(state, sp);
  const Vec3 body_rate = Jd.transpose() * e.earth + J.transpose() * e_dot;
  return Wrench::from(-g.kp.cwiseProduct(e.body) - g.kd.cwiseProduct(body_rate));
}

LambdaSelection select_lambda(double f_r, double f_s, double t_u) {
  if (!(f_r > 0.0) || !(f_s > 0.0) || !(t_u > 0.0))
    throw ConfigError("select_lambda: f_r, f_s and t_u must be positive");
  LambdaSelection sel;
  sel.resonance = 2.0 / 3.0 * kPi * f_r;
  sel.sampling = f_s / 5.0;
  sel.time_delay = 1.0 / (3.0 * t_u);
  sel.selected = sel.resonance;
  sel.selected_index = 1;
  if (sel.sampling < sel.selected) {
    sel.selected = sel.sampling;
    sel.selected_index = 2;
  }
  if (sel.time_delay < sel.selected) {
    sel.selected = sel.time_delay;
    sel.selected_index = 3;
  }
  return sel;
}

SimplifiedModel SimplifiedModel::from(const VehicleParams& p) {
  SimplifiedModel m;
  m.M1 = Vec3(p.mass - p.X_udot, p.mass - p.Y_vdot, p.inertia_z - p.N_rdot).asDiagonal();
  m.D1 = Vec3(p.X_u, p.Y_v, p.N_r).asDiagonal();
  return m;
}

Mat3 SimplifiedModel::C1(const Vec3& nu) const {
  const double m11 = M1(0, 0), m22 = M1(1, 1);
  Mat3 C;
  C << 0.0, 0.0, -m22 * nu(1),
       0.0, 0.0, m11 * nu(0),
       m22 * nu(1), -m11 * nu(0), 0.0;
  return C;
}

Vec3 model_compensation(const SimplifiedModel& model, const VehicleState& state,
                        const Vec3& eta_r_dot, const Vec3& eta_r_ddot) {
  const double psi = state.eta(2);
  const Mat3 Jt = rotation_matrix(psi).transpose();
  const Mat3 Jdt = rotation_matrix_rate(psi, state.nu(2)).transpose();
  const Vec3 nu_r = Jt * eta_r_dot;
  return model.M1 * (Jt * eta_r_ddot + Jdt * eta_r_dot) + model.C1(state.nu) * nu_r +
         model.D1 * nu_r;
}

void BackstepGains::validate() const {
  require_positive(lambda, "backstepping lambda");
  require_positive(kd, "backstepping kd");
  require_positive(kp, "backstepping kp");
}

BacksteppingTerms backstepping_terms(const VehicleState& state, const Setpoint& sp,
                                     const BackstepGains& g) {
  const TrackingError e = tracking_error(state, sp);
  const Vec3 e_dot = tracking_error_rate(state, sp);
  const Mat3 Jt = rotation_matrix(state.eta(2)).transpose();

  BacksteppingTerms t;
  t.eta_r_dot = sp.eta_d_dot - g.lambda.cwiseProduct(e.earth);
  t.eta_r_ddot = -g.lambda.cwiseProduct(e_dot);
  t.surface = e_dot + g.lambda.cwiseProduct(e.earth);
  const Vec3 tau = model_compensation(g.model, state, t.eta_r_dot, t.eta_r_ddot) -
                   Jt * g.kd.cwiseProduct(t.surface) - Jt * g.kp.cwiseProduct(e.earth);
  t.tau = Wrench::from(tau);
  return t;
}

Wrench backstepping_control(const VehicleState& state, const Setpoint& sp, const BackstepGains& g) {
  return backstepping_terms(state, sp, g).tau;
}

double sat(double x) { return std::clamp(x, -1.0, 1.0); }

void SlidingGains::validate() const {
  require_positive(lambda, "sliding lambda");
  require_positive(R, "sliding R");
  require_positive(E, "sliding E");
  if (!(antiwindup_scale >= 0.0 && antiwindup_scale <= 1.0))
    throw ConfigError("sliding anti-windup scale must lie in [0, 1]");
}

SlidingTerms sliding_terms(const VehicleState& state, const Setpoint& sp, const SlidingGains& g,
                           const Vec3& error_integral, bool output_saturated) {
  const TrackingError e = tracking_error(state, sp);
  const Vec3 e_dot = tracking_error_rate(state, sp);
  const Mat3 J = rotation_matrix(state.eta(2));
  const Mat3 Jt = J.transpose();

  SlidingTerms t;
  t.integral_term = error_integral;
  if (output_saturated) {
    // scale the body-sway component of the integral only
    Vec3 body = Jt * error_integral;
    body(1) *= g.antiwindup_scale;
    t.integral_term = J * body;
  }
  const Vec3 lam2 = g.lambda.cwiseProduct(g.lambda);
  t.surface = e_dot + 2.0 * g.lambda.cwiseProduct(e.earth) + lam2.cwiseProduct(t.integral_term);
  t.eta_r_dot = sp.eta_d_dot - 2.0 * g.lambda.cwiseProduct(e.earth) -
                lam2.cwiseProduct(t.integral_term);
  t.eta_r_ddot = -2.0 * g.lambda.cwiseProduct(e_dot) - lam2.cwiseProduct(e.earth);
  for (int i = 0; i < 3; ++i) t.switching(i) = g.R(i) * sat(t.surface(i) / g.E(i));
  const Vec3 tau = model_compensation(g.model, state, t.eta_r_dot, t.eta_r_ddot) - Jt * t.switching;
  t.tau = Wrench::from(tau);
  return t;
}

SlidingModeController::SlidingModeController(SlidingGains gains) : gains_(std::move(gains)) {
  gains_.validate();
}

Wrench SlidingModeController::update(const VehicleState& state, const Setpoint& sp, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sliding mode update: dt must be positive");
  integral_ += tracking_error(state, sp).earth * dt;
  last_ = sliding_terms(state, sp, gains_, integral_, saturated_);
  return last_.tau;
}

void SlidingModeController::reset() {
  integral_.setZero();
  saturated_ = false;
  last_ = {};
}

Wrench apply_feedforward(const Wrench& tau, const Wrench& tau_wind_estimate) {
  return tau - tau_wind_estimate;
}

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::pd: return "pd";
    case ControllerKind::backstepping: return "backstepping";
    case ControllerKind::sliding: return "sliding";
  }
  return "?";
}

ControllerKind controller_kind_from_string(std::string_view s) {
  if (s == "pd") return ControllerKind::pd;
  if (s == "backstepping") return ControllerKind::backstepping;
  if (s == "sliding") return ControllerKind::sliding;
  throw ConfigError("unknown controller '" + std::string(s) +
                    "' (expected pd, backstepping or sliding)");
}

StationKeepingController::StationKeepingController(const ControllerConfig& cfg,
                                                   const VehicleParams& params)
    : kind_(cfg.kind), law_(cfg.pd) {
  switch (cfg.kind) {
    case ControllerKind::pd:
      cfg.pd.validate();
      law_ = cfg.pd;
      break;
    case ControllerKind::backstepping: {
      BackstepGains g = cfg.backstepping;
      g.model = SimplifiedModel::from(params);
      g.validate();
      law_ = g;
      break;
    }
    case ControllerKind::sliding: {
      SlidingGains g = cfg.sliding;
      g.model = SimplifiedModel::from(params);
      law_.emplace<SlidingModeController>(g);
      break;
    }
  }
}

Wrench StationKeepingController::update(const VehicleState& state, const Setpoint& sp, double dt) {
  struct Visitor {
    const VehicleState& state;
    const Setpoint& sp;
    double dt;
    Wrench operator()(const PDGains& g) const { return pd_control(state, sp, g); }
    Wrench operator()(const BackstepGains& g) const { return backstepping_control(state, sp, g); }
    Wrench operator()(SlidingModeController& c) const { return c.update(state, sp, dt); }
  };
  return std::visit(Visitor{state, sp, dt}, law_);
}

void StationKeepingController::set_output_saturated(bool saturated) {
  if (auto* c = std::get_if<SlidingModeController>(&law_)) c->set_output_saturated(saturated);
}

}  // namespace usv
