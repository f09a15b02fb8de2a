// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include "usv/allocation.hpp"
#include "usv/angles.hpp"
#include "usv/config.hpp"
#include "usv/controllers.hpp"
#include "usv/harness.hpp"
#include "usv/simulator.hpp"
#include "usv/vehicle.hpp"
#include "usv/wind.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace usv;

namespace {

// tolerances
constexpr double kMatrixTol = 1e-12;
constexpr double kMatrixBudgetS = 10.0;
constexpr double kLambdaTol = 1e-3;
constexpr double kLambdaReference = 0.16;
constexpr double kLambdaRounding = 0.01;
constexpr double kResidualTol = 1e-6;
constexpr double kNormSlack = 1e-9;
constexpr double kWorkedCaseTol = 0.1;
constexpr double kSettlePosition = 0.5;  // m
constexpr double kSettleHeading = 5.0;   // deg
constexpr double kSettleTime = 120.0;    // s
constexpr double kRunBudgetS = 5.0;
constexpr double kFeedforwardSpread = 0.25;
constexpr double kIntensityLo = 0.135, kIntensityHi = 0.165;
constexpr double kEnergyBelowCutoff = 0.90;
constexpr double kLengthScaleMin = 70.0;  // m
constexpr double kTerminalSpeedTol = 0.005;

const std::filesystem::path kConfigs = USV_CONFIG_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome matrix_structure() {
  const auto t0 = Clock::now();
  const VehicleParams p = wamv16_params(kStationKeepingSpeed);
  const Mat3 M = mass_matrix(p);
  bool ok = (M - M.transpose()).cwiseAbs().maxCoeff() == 0.0 && M.llt().info() == Eigen::Success;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ang(-kPi, kPi), lin(-3.0, 3.0), rot(-1.0, 1.0);
  double worst_j = 0.0, worst_det = 0.0, worst_c = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const Mat3 J = rotation_matrix(ang(rng));
    worst_j = std::max(worst_j, (J.transpose() * J - Mat3::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(J.determinant() - 1.0));
    const Vec3 nu(lin(rng), lin(rng), rot(rng));
    const Mat3 C = coriolis_matrix(p, nu);
    worst_c = std::max(worst_c, (C + C.transpose()).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(t0);
  ok = ok && worst_j < kMatrixTol && worst_det < kMatrixTol && worst_c < kMatrixTol &&
       elapsed < kMatrixBudgetS;
  return {ok, fmt("%d states, max |JtJ-I| %.2e, max |det-1| %.2e, max |C+Ct| %.2e, %.2f s", n,
                  worst_j, worst_det, worst_c, elapsed)};
}

Outcome thrust_calibration() {
  const double knots[17][2] = {{-100, -102}, {-90, -84}, {-80, -66}, {-70, -44}, {-60, -31},
                               {-50, -13},   {-40, -9},  {-30, -4},  {20, 29},   {30, 34},
                               {40, 78},     {50, 110},  {60, 144},  {70, 175},  {80, 203},
                               {90, 228},    {100, 254}};
  int exact = 0;
  for (const auto& k : knots) exact += thrust_from_command(k[0]) == k[1];
  int violations = 0;
  double prev = thrust_from_command(-100.0);
  constexpr int n = 10000;
  for (int i = 1; i <= n; ++i) {
    const double t = thrust_from_command(-100.0 + 200.0 * i / n);
    violations += t < prev;
    prev = t;
  }
  return {exact == 17 && violations == 0,
          fmt("%d/17 knots exact, %d monotonicity violations over %d points", exact, violations, n)};
}

Outcome lambda_selection() {
  const LambdaSelection s = select_lambda(0.8, 4.0, 2.0);
  const bool ok = s.selected_index == 3 && std::abs(s.resonance - 1.676) < kLambdaTol &&
                  std::abs(s.sampling - 0.8) < kLambdaTol &&
                  std::abs(s.time_delay - 0.1667) < kLambdaTol &&
                  std::abs(s.selected - kLambdaReference) <= kLambdaRounding;
  return {ok, fmt("selected candidate %d, (%.4f, %.4f, %.4f)", s.selected_index, s.resonance,
                  s.sampling, s.time_delay)};
}

Outcome allocation_optimality() {
  const AllocatorConfig cfg = AllocatorConfig::from(wamv16_params(kStationKeepingSpeed));
  const Eigen::MatrixXd T = build_transformation(cfg);
  const Eigen::MatrixXd P = weighted_pseudoinverse(T, cfg.weights);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> force(-127.0, 127.0), shift(-150.0, 150.0);
  double worst_residual = 0.0;
  long beaten = 0;
  constexpr int n_tau = 10000, n_alt = 1000;
  Eigen::Matrix3d A;
  A << T.col(0), T.col(2), T.col(3);
  const auto lu = A.partialPivLu();
  for (int i = 0; i < n_tau; ++i) {
    const Eigen::Vector4d f0(force(rng), force(rng), force(rng), force(rng));
    const Vec3 tau = T * f0;
    const Eigen::Vector4d f = P * tau;
    worst_residual = std::max(worst_residual, (T * f - tau).norm());
    const double cost = f.squaredNorm();
    for (int k = 0; k < n_alt; ++k) {
      // a random alternative with the same wrench: free Fyp, solve the rest
      Eigen::Vector4d alt;
      alt(1) = f(1) + shift(rng);
      const Vec3 rest = lu.solve(tau - T.col(1) * alt(1));
      alt(0) = rest(0);
      alt(2) = rest(1);
      alt(3) = rest(2);
      if (alt.squaredNorm() + kNormSlack < cost) ++beaten;
    }
  }
  const Eigen::Vector4d w = P * Vec3(0.0, 100.0, 0.0);
  const Eigen::Vector4d expect(71.0, 50.0, -71.0, 50.0);
  const double worked = (w - expect).cwiseAbs().maxCoeff();
  const bool ok = worst_residual < kResidualTol && beaten == 0 && worked <= kWorkedCaseTol;
  return {ok, fmt("max residual %.2e over %d wrenches, %ld of %ld alternatives cheaper, "
                  "tau=(0,100,0) -> (%.2f, %.2f, %.2f, %.2f)",
                  worst_residual, n_tau, beaten, long(n_tau) * n_alt, w(0), w(1), w(2), w(3))};
}

Outcome angle_logic_sweep() {
  const double limit = deg2rad(45.0);
  int mismatches = 0, count = 0;
  for (int tenth = -1800; tenth <= 1800; ++tenth, ++count) {
    const double deg = tenth / 10.0;
    const AngleLogicResult r = apply_angle_logic(deg2rad(deg), 100.0, limit);
    const int a = std::abs(tenth);
    double az, thrust;
    bool zeroed = false;
    if (a <= 450) {
      az = deg;
      thrust = 100.0;
    } else if (a < 1350) {
      az = tenth > 0 ? 45.0 : -45.0;
      thrust = 0.0;
      zeroed = true;
    } else {
      az = tenth > 0 ? deg - 180.0 : deg + 180.0;
      thrust = -100.0;
    }
    if (std::abs(rad2deg(r.azimuth) - az) > 1e-9 || r.thrust != thrust || r.zeroed != zeroed)
      ++mismatches;
  }
  const AngleLogicResult rev = apply_angle_logic(deg2rad(160.0), 100.0, limit);
  const bool reversal = std::abs(rad2deg(rev.azimuth) + 20.0) < 1e-9 && rev.thrust == -100.0;
  return {mismatches == 0 && reversal,
          fmt("%d mismatches over %d angles, 160 deg -> (%.1f deg, %.0f N)", mismatches, count,
              rad2deg(rev.azimuth), rev.thrust)};
}

Outcome undisturbed_regulation() {
  const ScenarioFile base = load_scenario(kConfigs / "offset.json");
  const double offset = base.scenario.initial_offset.head<2>().norm();
  bool ok = std::abs(offset - 5.0) < 1e-3 &&
            std::abs(rad2deg(base.scenario.initial_offset(2)) - 45.0) < 1e-9;
  std::ostringstream os;
  os << "offset " << fmt("%.3f", offset) << " m / 45 deg;";
  for (ControllerKind kind :
       {ControllerKind::pd, ControllerKind::backstepping, ControllerKind::sliding}) {
    Scenario sc = base.scenario;
    sc.controller.kind = kind;
    const auto t0 = Clock::now();
    const SimLog log = run_station_keeping(sc, base.sim);
    const double elapsed = seconds_since(t0);
    double settled = 0.0;
    for (const LogRow& r : log.rows) {
      const bool inside = std::hypot(r.error(0), r.error(1)) < kSettlePosition &&
                          std::abs(rad2deg(r.error(2))) < kSettleHeading;
      if (!inside) settled = r.t + 0.25;
    }
    const bool pass = settled <= kSettleTime && elapsed < kRunBudgetS &&
                      log.rows.back().t >= base.sim.duration - 0.25 - 1e-9;
    ok = ok && pass;
    os << ' ' << to_string(kind) << fmt(" settled %.1f s in %.3f s;", settled, elapsed);
  }
  return {ok, os.str()};
}

const SummaryRow* find_row(const MatrixReport& r, const std::string& scenario, ControllerKind k,
                           bool ff) {
  for (const auto& row : r.summary)
    if (row.scenario == scenario && row.controller == k && row.feedforward == ff) return &row;
  throw std::runtime_error("missing summary row for " + scenario + " " + cell_label(k, ff));
}

Outcome table_ordering(const MatrixReport& r) {
  const auto* pd = find_row(r, "location2", ControllerKind::pd, false);
  const auto* bs = find_row(r, "location2", ControllerKind::backstepping, false);
  const auto* bs_ff = find_row(r, "location2", ControllerKind::backstepping, true);
  const auto* sm = find_row(r, "location2", ControllerKind::sliding, false);
  const bool full = pd->runs == 20 && bs->runs == 20 && bs_ff->runs == 20 && sm->runs == 20;
  const bool ok = full && sm->errors.mean_heading_deg <= bs->errors.mean_heading_deg &&
                  sm->errors.mean_heading_deg <= pd->errors.mean_heading_deg &&
                  bs_ff->errors.mean_position < bs->errors.mean_position;
  return {ok, fmt("20 seeds, heading sliding %.3f / backstepping %.3f / pd %.3f deg; "
                  "backstepping position %.3f -> %.3f m with feedforward",
                  sm->errors.mean_heading_deg, bs->errors.mean_heading_deg,
                  pd->errors.mean_heading_deg, bs->errors.mean_position,
                  bs_ff->errors.mean_position)};
}

Outcome feedforward_neutrality(const MatrixReport& r) {
  const auto* off = find_row(r, "location1", ControllerKind::sliding, false);
  const auto* on = find_row(r, "location1", ControllerKind::sliding, true);
  auto rel = [](double with, double without) { return std::abs(with - without) / without; };
  const double dp = rel(on->errors.mean_position, off->errors.mean_position);
  const double dh = rel(on->errors.mean_heading_deg, off->errors.mean_heading_deg);
  const bool ok = off->runs == 20 && on->runs == 20 && dp < kFeedforwardSpread &&
                  dh < kFeedforwardSpread;
  return {ok, fmt("20 seeds, position %.3f vs %.3f m (%.1f%%), heading %.3f vs %.3f deg (%.1f%%)",
                  on->errors.mean_position, off->errors.mean_position, 100.0 * dp,
                  on->errors.mean_heading_deg, off->errors.mean_heading_deg, 100.0 * dh)};
}

Outcome wind_statistics() {
  WindSynthesisSpec spec;
  spec.mean_speed = 2.43;
  spec.intensity = 0.15;
  spec.cutoff_hz = 0.03;
  spec.duration = 700.0;
  double lo_s = 1.0, hi_s = 0.0, lo_e = 1.0, lo_l = 1e9;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    spec.seed = seed;
    const WindSeries w = synthesize_wind(spec);
    std::vector<double> v;
    for (const auto& s : w.samples) v.push_back(s.speed);
    const TurbulenceStats st = turbulence_stats(v, w.dt);
    const double below = st.energy_fraction_below(spec.cutoff_hz);
    lo_s = std::min(lo_s, st.intensity);
    hi_s = std::max(hi_s, st.intensity);
    lo_e = std::min(lo_e, below);
    lo_l = std::min(lo_l, st.length_scale);
    ok = ok && st.intensity >= kIntensityLo && st.intensity <= kIntensityHi &&
         below >= kEnergyBelowCutoff && st.length_scale >= kLengthScaleMin;
  }
  return {ok, fmt("20 seeds, intensity %.3f..%.3f, energy below cutoff >= %.3f, L_t >= %.1f m",
                  lo_s, hi_s, lo_e, lo_l)};
}

Outcome sysid_consistency() {
  ManeuverParams mp;
  const SimLog log = run_sysid_maneuver(Maneuver::acceleration, mp);
  const VehicleParams& p = mp.vehicle;
  const double thrust = thrust_from_command(mp.throttle);
  const double root =
      (-p.X_u + std::sqrt(p.X_u * p.X_u + 4.0 * p.X_uu * thrust)) / (2.0 * p.X_uu);
  double terminal = 0.0;
  int rises = 0;
  double prev = 0.0;
  bool coasting = false;
  for (const LogRow& r : log.rows) {
    if (!coasting && r.t >= mp.accel_duration - 1e-9) {
      terminal = r.truth.nu(0);
      coasting = true;
    } else if (coasting && r.truth.nu(0) >= prev) {
      ++rises;
    }
    prev = r.truth.nu(0);
  }
  const double err = std::abs(terminal - root) / root;
  return {coasting && err < kTerminalSpeedTol && rises == 0,
          fmt("terminal %.4f m/s vs root %.4f m/s (%.3f%%), %d non-decreasing coast samples",
              terminal, root, 100.0 * err, rises)};
}

}  // namespace

int main() {
  report(1, "matrix structure", matrix_structure);
  report(2, "thrust calibration", thrust_calibration);
  report(3, "bandwidth selection", lambda_selection);
  report(4, "allocation exactness and optimality", allocation_optimality);
  report(5, "angle logic sweep", angle_logic_sweep);
  report(6, "undisturbed regulation", undisturbed_regulation);

  const MatrixConfig cfg = load_matrix(kConfigs / "matrix.json");
  std::optional<MatrixReport> first;
  std::string matrix_error;
  try {
    first = run_experiment_matrix(cfg);
  } catch (const std::exception& e) {
    matrix_error = e.what();
  }
  auto with_matrix = [&](Outcome (*f)(const MatrixReport&)) {
    return [&, f] {
      if (!first) return Outcome{false, "matrix run failed: " + matrix_error};
      if (first->failures()) return Outcome{false, "aborted runs in the matrix"};
      return f(*first);
    };
  };
  report(7, "controller ordering under beam wind", with_matrix(table_ordering));
  report(8, "feedforward near-neutral under head wind", with_matrix(feedforward_neutrality));
  report(9, "wind statistics", wind_statistics);
  report(10, "sysid consistency", sysid_consistency);
  report(11, "determinism", [&] {
    if (!first) return Outcome{false, "matrix run failed: " + matrix_error};
    MatrixOptions serial;
    serial.threads = 1;
    const std::string a = format_summary_table(*first);
    const std::string b = format_summary_table(run_experiment_matrix(cfg, serial));
    return Outcome{a == b, fmt("%zu cells, summary tables %s (%zu bytes)", first->cells.size(),
                               a == b ? "byte-identical" : "differ", a.size())};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
