// Wind and current disturbances.
//
// Wind direction convention: beta_w is the earth-frame direction the wind
// comes from, and the apparent angle of attack gamma_rw = 0 is wind from dead
// ahead, which pushes the hull aft (C_x(0) = -c_x).
#pragma once

#include "usv/vehicle.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace usv {

struct WindParams {
  double air_density = 1.2;  // kg/m^3
  // Windage areas and lever are rough projections of the hull particulars,
  // not measured values.
  double frontal_area = 1.2;  // m^2
  double lateral_area = 2.4;  // m^2
  double lateral_lever = 0.5; // m
  double c_x = 0.50;
  double c_y = 0.50;
  double c_z = 0.33;

  void validate() const;
  // Human-readable notes for coefficients outside the usual ship ranges.
  std::vector<std::string> range_warnings() const;
};

struct WindSample {
  double t = 0.0;
  double speed = 0.0;  // V_rw, m/s
  double angle = 0.0;  // gamma_rw, rad in (-pi, pi]
};

struct TrueWind {
  double speed = 0.0;      // V_w
  double direction = 0.0;  // beta_w, earth frame
};

struct CurrentParams {
  double speed = 0.0;      // m/s
  double direction = 0.0;  // earth-frame direction the water flows toward
  double modulation_amplitude = 0.0;  // m/s
  double modulation_period = 0.0;     // s, 0 disables modulation

  void validate() const;
  double speed_at(double t) const;
};

double wind_coeff_x(const WindParams& wp, double gamma);
double wind_coeff_y(const WindParams& wp, double gamma);
double wind_coeff_n(const WindParams& wp, double gamma);

Wrench wind_wrench(const WindParams& wp, const WindSample& sample);

struct RelativeWind {
  double u_rw = 0.0;
  double v_rw = 0.0;
  WindSample sample;
};

RelativeWind relative_wind(const TrueWind& wind, const VehicleState& state);
WindSample apparent_from_true(const TrueWind& wind, const VehicleState& state);
// Inverse of apparent_from_true for a known pose and velocity.
TrueWind true_from_apparent(const WindSample& apparent, const VehicleState& state);

struct WindSynthesisSpec {
  double mean_speed = 2.43;       // m/s
  double mean_direction = 0.0;    // rad
  double intensity = 0.15;        // TKE / mean
  double cutoff_hz = 0.03;
  double direction_std = 0.0;     // rad, turbulent direction wobble
  double duration = 700.0;        // s
  double dt = 1.0;                // s
  std::uint64_t seed = 1;
};

struct WindSeries {
  double dt = 1.0;
  std::vector<TrueWind> samples;  // sample k at t = k * dt

  // Zero-order hold lookup; clamps outside the covered span.
  TrueWind at(double t) const;
  double duration() const { return dt * static_cast<double>(samples.size()); }
};

WindSeries synthesize_wind(const WindSynthesisSpec& spec);

struct TurbulenceStats {
  double mean = 0.0;
  double tke = 0.0;
  double intensity = 0.0;
  std::vector<double> frequency;  // Hz, one-sided, DC excluded
  std::vector<double> psd;        // normalized so sum(psd) * df == 1
  double f90 = 0.0;               // Hz, 90 % of fluctuation energy below
  double length_scale = 0.0;      // mean / f90, m
  // Share of fluctuation energy strictly below a frequency.
  double energy_fraction_below(double f_hz) const;
};

enum class PsdWindow { rectangular, hann };

TurbulenceStats turbulence_stats(std::span<const double> speed, double dt,
                                 PsdWindow window = PsdWindow::rectangular);

// Causal moving average over the last `span` samples for speed, and over
// unit vectors for direction. The first samples average the available prefix.
class AnemometerFilter {
 public:
  explicit AnemometerFilter(std::size_t span = 20);
  WindSample push(const WindSample& raw);
  void reset();

 private:
  std::size_t span_;
  std::vector<WindSample> ring_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  double sum_speed_ = 0.0;
  double sum_cos_ = 0.0;
  double sum_sin_ = 0.0;
};

std::vector<WindSample> anemometer_filter(std::span<const WindSample> raw,
                                         std::size_t span = 20);

// Force of the relative water flow on the hull through the linear drag rows.
Wrench current_wrench(const CurrentParams& cp, const VehicleState& state,
                      const VehicleParams& params, double t = 0.0);

// CSV wind traces: columns t, V, direction_deg.
void write_wind_csv(const std::filesystem::path& path, const WindSeries& series);
WindSeries read_wind_csv(const std::filesystem::path& path);

}  // namespace usv
