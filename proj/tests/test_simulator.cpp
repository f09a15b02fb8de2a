#include "support.hpp"
#include "usv/angles.hpp"
#include "usv/simulator.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace usv;
using usv::testing::Gen;

namespace {

Scenario beam_scenario(ControllerKind kind, bool ff) {
  Scenario sc;
  sc.name = "beam";
  sc.wind.model = WindModel::synthetic;
  sc.wind.synthetic.mean_speed = 2.5;
  sc.wind.synthetic.mean_direction = deg2rad(90.0);
  sc.wind.synthetic.intensity = 0.15;
  sc.wind.synthetic.direction_std = deg2rad(14.0);
  sc.current = {0.2, deg2rad(-90.0)};
  sc.controller.kind = kind;
  sc.controller.feedforward = ff;
  return sc;
}

// Steady body velocity under a constant wrench by Newton iteration on nu_dot = 0.
Vec3 steady_velocity(const VehicleParams& p, const Wrench& tau, Vec3 nu) {
  for (int it = 0; it < 100; ++it) {
    VehicleState s;
    s.nu = nu;
    const Vec3 f = state_derivative(p, s, tau, {}).nu_dot;
    if (f.norm() < 1e-13) break;
    Mat3 jac;
    for (int j = 0; j < 3; ++j) {
      VehicleState h = s;
      h.nu(j) += 1e-7;
      jac.col(j) = (state_derivative(p, h, tau, {}).nu_dot - f) / 1e-7;
    }
    nu -= jac.lu().solve(f);
  }
  return nu;
}

}  // namespace

TEST_CASE("RK4 step") {
  const VehicleParams p = wamv16_params();
  const VehicleState rest;
  const VehicleState next = step(p, rest, {}, 0.05);
  CHECK(next.eta.norm() == 0.0);
  CHECK(next.nu.norm() == 0.0);

  SUBCASE("fourth-order accuracy on surge") {
    auto run = [&](double dt) {
      VehicleState s;
      const int n = static_cast<int>(std::lround(10.0 / dt));
      for (int i = 0; i < n; ++i) s = step(p, s, {200.0, 0.0, 0.0}, dt);
      return s.nu(0);
    };
    const double a = run(0.2), b = run(0.1), c = run(0.05);
    const double ratio = (a - b) / (b - c);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.15));
  }
  SUBCASE("heading stays wrapped") {
    VehicleState s;
    s.eta(2) = kPi - 0.01;
    s.nu(2) = 0.5;
    s = step(p, s, {}, 0.05);
    CHECK(s.eta(2) < 0.0);
    CHECK(s.eta(2) > -kPi);
  }
  SUBCASE("non-finite input aborts") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step(p, rest, {nan, 0.0, 0.0}, 0.05), SimulationError);
    CHECK_THROWS_AS(step(p, rest, {}, 0.0), std::invalid_argument);
  }
}

TEST_CASE("sensor models") {
  VehicleState truth;
  truth.eta = {0.49, 3.7, deg2rad(12.34)};
  truth.nu = {0.3, 0.1, 0.01};
  SensorModels m;
  const VehicleState pass = sample_sensors(truth, m);
  CHECK(pass.eta == truth.eta);
  CHECK(pass.nu == truth.nu);

  m.enabled = true;
  const VehicleState q = sample_sensors(truth, m);
  CHECK(q.eta(0) == 0.0);
  CHECK(q.eta(1) == 4.0);
  CHECK(rad2deg(q.eta(2)) == doctest::Approx(12.3));
  CHECK(q.nu == truth.nu);

  const WindSample a = sample_anemometer({0.0, 2.437, 0.4}, m);
  CHECK(a.speed == doctest::Approx(2.4));
  CHECK(a.angle == 0.4);
  CHECK(sample_anemometer({0.0, 55.0, 0.0}, m).speed == 40.0);

  SUBCASE("a slow drift shows up as single grid steps") {
    std::vector<double> sensed;
    for (int i = 0; i <= 100; ++i) {
      VehicleState s;
      s.eta(0) = 0.2 + i * 0.01;
      sensed.push_back(sample_sensors(s, m).eta(0));
    }
    int jumps = 0;
    for (std::size_t i = 1; i < sensed.size(); ++i)
      if (sensed[i] != sensed[i - 1]) {
        ++jumps;
        CHECK(sensed[i] - sensed[i - 1] == doctest::Approx(1.0));
      }
    CHECK(jumps == 1);
  }
}

TEST_CASE("sim config rates") {
  SimConfig cfg;
  CHECK(cfg.physics_steps_per_tick() == 5);
  CHECK(cfg.ticks_per_anemometer_sample() == 4);
  CHECK(cfg.tick_count() == 2800);
  cfg.control_rate = 3.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.anemometer_rate = 8.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("station keeping run") {
  SimConfig cfg;
  Scenario calm;
  calm.name = "calm";

  SUBCASE("undisturbed regulation holds the setpoint") {
    for (ControllerKind kind :
         {ControllerKind::pd, ControllerKind::backstepping, ControllerKind::sliding}) {
      calm.controller.kind = kind;
      const SimLog log = run_station_keeping(calm, cfg);
      REQUIRE(log.rows.size() == 2800);
      double mean = 0.0;
      for (const auto& r : log.rows) mean += std::hypot(r.error(0), r.error(1));
      CHECK(mean / 2800.0 < 0.1);
    }
  }
  SUBCASE("rate contract and actuator limits") {
    const Scenario sc = beam_scenario(ControllerKind::sliding, true);
    const SimLog log = run_station_keeping(sc, cfg);
    REQUIRE(log.rows.size() == 2800);
    for (std::size_t k = 0; k < log.rows.size(); ++k) {
      const LogRow& r = log.rows[k];
      CHECK(r.t == doctest::Approx(0.25 * static_cast<double>(k)).epsilon(1e-12));
      CHECK(r.wind_fresh == (k % 4 == 0));
      for (const ThrusterSetpoint* s : {&r.commanded, &r.applied}) {
        CHECK(std::abs(s->azimuth_port) <= sc.allocator.azimuth_limit + 1e-12);
        CHECK(std::abs(s->azimuth_stbd) <= sc.allocator.azimuth_limit + 1e-12);
        CHECK(s->thrust_port <= sc.allocator.thrust_forward_max);
        CHECK(s->thrust_port >= -sc.allocator.thrust_reverse_max);
        CHECK(s->thrust_stbd <= sc.allocator.thrust_forward_max);
        CHECK(s->thrust_stbd >= -sc.allocator.thrust_reverse_max);
      }
      if (r.wind_fresh) CHECK(r.wind_raw.t == doctest::Approx(r.t));
    }
  }
  SUBCASE("same seed gives identical logs, different seeds differ") {
    const Scenario sc = beam_scenario(ControllerKind::backstepping, false);
    cfg.duration = 200.0;
    cfg.seed = 3;
    const SimLog a = run_station_keeping(sc, cfg);
    const SimLog b = run_station_keeping(sc, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    bool same = true;
    for (std::size_t k = 0; k < a.rows.size(); ++k)
      same = same && a.rows[k].truth.eta == b.rows[k].truth.eta &&
             a.rows[k].applied == b.rows[k].applied && a.rows[k].tau == b.rows[k].tau;
    CHECK(same);
    cfg.seed = 4;
    const SimLog c = run_station_keeping(sc, cfg);
    CHECK(c.rows.back().truth.eta != a.rows.back().truth.eta);
  }
  SUBCASE("halving dt barely moves the trajectory") {
    for (ControllerKind kind :
         {ControllerKind::pd, ControllerKind::backstepping, ControllerKind::sliding}) {
      const Scenario sc = beam_scenario(kind, false);
      const SimLog a = run_station_keeping(sc, cfg);
      SimConfig fine = cfg;
      fine.dt = 0.025;
      const SimLog b = run_station_keeping(sc, fine);
      REQUIRE(a.rows.size() == b.rows.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < a.rows.size(); ++k)
        worst = std::max(worst,
                         (a.rows[k].truth.eta.head<2>() - b.rows[k].truth.eta.head<2>()).norm());
      CHECK(worst < 1e-3);
    }
  }
  SUBCASE("starts on the setpoint") {
    Scenario sc = calm;
    sc.setpoint.eta_d = {10.0, -4.0, 1.0};
    cfg.duration = 10.0;
    const SimLog log = run_station_keeping(sc, cfg);
    CHECK(log.rows.front().error.norm() == 0.0);
    CHECK(log.rows.back().error.norm() < 1e-12);
  }
  SUBCASE("invalid scenarios are reported before running") {
    Scenario sc = calm;
    sc.controller.sliding.E(1) = 0.0;
    CHECK_THROWS_AS(run_station_keeping(sc, cfg), ConfigError);
  }
}

TEST_CASE("feedforward cancels a steady wind at the setpoint") {
  const Scenario sc;
  const Wrench wind = wind_wrench(sc.wind_params, {0.0, 2.43, 0.0});
  const Wrench cmd = apply_feedforward(Wrench{}, wind);
  const AllocationResult a = allocate(cmd, sc.allocator);
  REQUIRE_FALSE(a.saturated);
  REQUIRE_FALSE(a.zeroed[0]);
  REQUIRE_FALSE(a.zeroed[1]);
  const Wrench net = propulsion_wrench(sc.vehicle, a.setpoint) + wind;
  CHECK(net.vec().norm() < 1e-9);
}

TEST_CASE("relative flow") {
  const VehicleParams p = wamv16_params(kStationKeepingSpeed);
  CHECK(relative_flow_wrench({}, VehicleState{}, p, 0.0) == Wrench{});
  VehicleState drift;
  drift.nu = {0.0, 0.2, 0.0};
  const Wrench net = drag_wrench(p, drift.nu) - relative_flow_wrench({0.2, kPi / 2.0}, drift, p, 0.0);
  CHECK(net.vec().norm() < 1e-12);
  const Wrench w = relative_flow_wrench({0.2, kPi / 2.0}, VehicleState{}, p, 0.0);
  CHECK(w.y == doctest::Approx(p.Y_v * 0.2 + p.Y_vv * 0.04));
}

TEST_CASE("system identification maneuvers") {
  ManeuverParams mp;
  const VehicleParams& p = mp.vehicle;

  SUBCASE("bollard") {
    const SimLog log = run_sysid_maneuver(Maneuver::bollard, mp);
    CHECK(log.rows.back().tau.x == doctest::Approx(254.0));
    CHECK(log.rows.front().tau.x == doctest::Approx(-102.0));
  }
  SUBCASE("acceleration reaches the drag-balance speed, then coasts down") {
    const SimLog log = run_sysid_maneuver(Maneuver::acceleration, mp);
    CHECK(log.rows.size() == 480);
    const double root = (-p.X_u + std::sqrt(p.X_u * p.X_u + 4.0 * p.X_uu * 254.0)) / (2.0 * p.X_uu);
    const auto at60 = std::find_if(log.rows.begin(), log.rows.end(), [](const LogRow& r) { return r.t >= 60.0; });
    REQUIRE(at60 != log.rows.end());
    CHECK(at60->truth.nu(0) == doctest::Approx(root).epsilon(0.005));
    CHECK(at60->truth.nu(0) == doctest::Approx(1.5).epsilon(0.005));
    for (auto it = at60 + 1; it != log.rows.end(); ++it) CHECK(it->truth.nu(0) < (it - 1)->truth.nu(0));
  }
  SUBCASE("circle settles on the steady turning solution") {
    const SimLog log = run_sysid_maneuver(Maneuver::circle, mp);
    const Wrench tau = log.rows.back().tau;
    const Vec3 nu = steady_velocity(p, tau, log.rows.back().truth.nu);
    CHECK((log.rows.back().truth.nu - nu).norm() < 1e-3);
    // moment balance with yaw damping alone
    const double r_lin = tau.n / p.N_r;
    CHECK(nu(2) == doctest::Approx(r_lin).epsilon(0.1));
    CHECK(std::abs(nu(1)) < 0.1);
    CHECK(nu(2) < 0.0);
  }
  SUBCASE("zigzag alternates the turn direction") {
    const SimLog log = run_sysid_maneuver(Maneuver::zigzag, mp);
    CHECK(log.rows.size() == static_cast<std::size_t>((20 + 8 * 10) * 4));
    int sign_changes = 0;
    for (std::size_t k = 1; k < log.rows.size(); ++k)
      if ((log.rows[k].truth.nu(2) > 0) != (log.rows[k - 1].truth.nu(2) > 0)) ++sign_changes;
    CHECK(sign_changes >= 7);
  }
  SUBCASE("names") {
    CHECK(maneuver_from_string("circle") == Maneuver::circle);
    CHECK(to_string(Maneuver::zigzag) == "zigzag");
    CHECK_THROWS_AS(maneuver_from_string("spin"), ConfigError);
  }
}
