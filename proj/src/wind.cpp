#include "usv/wind.hpp"

#include "usv/angles.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace usv {

void WindParams::validate() const {
  if (!(air_density > 0.0)) throw ConfigError("wind: air_density must be positive");
  if (!(frontal_area > 0.0) || !(lateral_area > 0.0))
    throw ConfigError("wind: windage areas must be positive");
}

std::vector<std::string> WindParams::range_warnings() const {
  std::vector<std::string> out;
  auto check = [&](const char* name, double v, double lo, double hi) {
    if (v < lo || v > hi) {
      std::ostringstream os;
      os << name << " = " << v << " outside the usual range [" << lo << ", " << hi << "]";
      out.push_back(os.str());
    }
  };
  check("c_x", c_x, 0.5, 0.90);
  check("c_y", c_y, 0.7, 0.95);
  check("c_z", c_z, 0.05, 0.20);
  return out;
}

void CurrentParams::validate() const {
  if (!(speed >= 0.0)) throw ConfigError("current: speed must be non-negative");
  if (modulation_period < 0.0) throw ConfigError("current: modulation period must be >= 0");
}

double CurrentParams::speed_at(double t) const {
  if (modulation_period <= 0.0 || modulation_amplitude == 0.0) return speed;
  return std::max(0.0, speed + modulation_amplitude * std::sin(2.0 * kPi * t / modulation_period));
}

double wind_coeff_x(const WindParams& wp, double gamma) { return -wp.c_x * std::cos(gamma); }
double wind_coeff_y(const WindParams& wp, double gamma) { return wp.c_y * std::sin(gamma); }
double wind_coeff_n(const WindParams& wp, double gamma) { return wp.c_z * std::sin(2.0 * gamma); }

Wrench wind_wrench(const WindParams& wp, const WindSample& s) {
  const double q = 0.5 * wp.air_density * s.speed * s.speed;
  return {q * wind_coeff_x(wp, s.angle) * wp.frontal_area,
          q * wind_coeff_y(wp, s.angle) * wp.lateral_area,
          q * wind_coeff_n(wp, s.angle) * wp.lateral_area * wp.lateral_lever};
}

RelativeWind relative_wind(const TrueWind& w, const VehicleState& st) {
  const double rel = w.direction - st.eta(2);
  const double u_w = w.speed * std::cos(rel);
  const double v_w = w.speed * std::sin(rel);
  RelativeWind out;
  out.u_rw = u_w - st.nu(0);
  out.v_rw = v_w - st.nu(1);
  out.sample.speed = std::hypot(out.u_rw, out.v_rw);
  out.sample.angle = out.sample.speed == 0.0 ? 0.0 : wrap_angle(-std::atan2(out.v_rw, out.u_rw));
  return out;
}

WindSample apparent_from_true(const TrueWind& w, const VehicleState& st) {
  return relative_wind(w, st).sample;
}

TrueWind true_from_apparent(const WindSample& a, const VehicleState& st) {
  const double u_rw = a.speed * std::cos(a.angle);
  const double v_rw = -a.speed * std::sin(a.angle);
  const double u_w = u_rw + st.nu(0);
  const double v_w = v_rw + st.nu(1);
  TrueWind w;
  w.speed = std::hypot(u_w, v_w);
  w.direction = w.speed == 0.0 ? st.eta(2) : wrap_angle(st.eta(2) + std::atan2(v_w, u_w));
  return w;
}

TrueWind WindSeries::at(double t) const {
  if (samples.empty()) return {};
  if (t <= 0.0) return samples.front();
  const auto k = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
  return samples[std::min(k, samples.size() - 1)];
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Zero-mean band-limited series on bins 1..max_bin with a von Karman-like
// amplitude roll-off, rescaled to the requested standard deviation.
std::vector<double> band_limited_noise(std::mt19937_64& rng, std::size_t n, double dt,
                                       std::size_t max_bin, double knee_hz, double target_std) {
  std::vector<double> x(n, 0.0);
  if (target_std == 0.0 || max_bin == 0) return x;
  const double span = dt * static_cast<double>(n);
  for (std::size_t k = 1; k <= max_bin; ++k) {
    const double f = static_cast<double>(k) / span;
    const double amp = std::pow(1.0 + (f / knee_hz) * (f / knee_hz), -5.0 / 12.0);
    const double phase = 2.0 * kPi * unit_uniform(rng);
    const double w = 2.0 * kPi * f;
    for (std::size_t j = 0; j < n; ++j) x[j] += amp * std::cos(w * dt * static_cast<double>(j) + phase);
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double& v : x) {
    v -= mean;
    var += v * v;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (double& v : x) v *= target_std / sd;
  return x;
}

}  // namespace

WindSeries synthesize_wind(const WindSynthesisSpec& spec) {
  if (!(spec.mean_speed > 0.0)) throw ConfigError("windgen: mean speed must be positive");
  if (!(spec.intensity >= 0.0 && spec.intensity < 1.0))
    throw ConfigError("windgen: intensity must lie in [0, 1)");
  if (!(spec.cutoff_hz > 0.0)) throw ConfigError("windgen: cutoff must be positive");
  if (!(spec.dt > 0.0) || spec.dt >= 1.0 / (2.0 * spec.cutoff_hz))
    throw ConfigError("windgen: dt must be positive and below the Nyquist limit of the cutoff");
  if (!(spec.duration > spec.dt)) throw ConfigError("windgen: duration must exceed dt");

  const auto n = static_cast<std::size_t>(std::llround(spec.duration / spec.dt));
  const double span = spec.dt * static_cast<double>(n);
  // bins strictly below the cutoff
  const double edge = spec.cutoff_hz * span;
  auto max_bin = static_cast<std::size_t>(std::ceil(edge - 1e-9));
  max_bin = max_bin > 0 ? max_bin - 1 : 0;
  if (spec.intensity > 0.0 && max_bin == 0)
    throw ConfigError("windgen: duration too short to resolve any frequency below the cutoff");

  std::mt19937_64 rng(spec.seed);
  const double knee = spec.cutoff_hz / 4.0;
  const auto speed = band_limited_noise(rng, n, spec.dt, max_bin, knee,
                                        spec.intensity * spec.mean_speed);
  const auto heading = band_limited_noise(rng, n, spec.dt, max_bin, knee, spec.direction_std);

  WindSeries out;
  out.dt = spec.dt;
  out.samples.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.samples[j].speed = std::max(0.0, spec.mean_speed + speed[j]);
    out.samples[j].direction = wrap_angle(spec.mean_direction + heading[j]);
  }
  return out;
}

double TurbulenceStats::energy_fraction_below(double f_hz) const {
  if (frequency.empty()) return 1.0;
  double below = 0.0, total = 0.0;
  for (std::size_t k = 0; k < frequency.size(); ++k) {
    total += psd[k];
    if (frequency[k] < f_hz * (1.0 - 1e-12)) below += psd[k];
  }
  return total > 0.0 ? below / total : 1.0;
}

TurbulenceStats turbulence_stats(std::span<const double> v, double dt, PsdWindow window) {
  if (v.size() < 2) throw std::invalid_argument("turbulence_stats: need at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("turbulence_stats: dt must be positive");

  const std::size_t n = v.size();
  TurbulenceStats st;
  st.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  std::vector<double> fluct(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fluct[i] = v[i] - st.mean;
    ss += fluct[i] * fluct[i];
  }
  st.tke = std::sqrt(ss / static_cast<double>(n));
  if (st.mean == 0.0) throw std::invalid_argument("turbulence_stats: zero mean speed");
  st.intensity = st.tke / st.mean;

  double wsum2 = static_cast<double>(n);
  if (window == PsdWindow::hann) {
    wsum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
      fluct[i] *= w;
      wsum2 += w * w;
    }
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, fluct);

  const double df = 1.0 / (dt * static_cast<double>(n));
  const std::size_t half = n / 2;
  st.frequency.reserve(half);
  st.psd.reserve(half);
  double total = 0.0;
  for (std::size_t k = 1; k <= half; ++k) {
    const bool nyquist = (n % 2 == 0) && k == half;
    const double power = (nyquist ? 1.0 : 2.0) * std::norm(spec[k]) / (static_cast<double>(n) * wsum2);
    st.frequency.push_back(static_cast<double>(k) * df);
    st.psd.push_back(power);
    total += power;
  }
  if (total > 0.0) {
    double cum = 0.0;
    st.f90 = st.frequency.back();
    for (std::size_t k = 0; k < st.psd.size(); ++k) {
      cum += st.psd[k];
      if (cum >= 0.9 * total) {
        st.f90 = st.frequency[k];
        break;
      }
    }
    for (double& p : st.psd) p /= total * df;
    st.length_scale = st.mean / st.f90;
  } else {
    std::fill(st.psd.begin(), st.psd.end(), 0.0);
  }
  return st;
}

AnemometerFilter::AnemometerFilter(std::size_t span) : span_(span), ring_(span) {
  if (span == 0) throw std::invalid_argument("anemometer filter span must be positive");
}

void AnemometerFilter::reset() {
  next_ = count_ = 0;
  sum_speed_ = sum_cos_ = sum_sin_ = 0.0;
}

WindSample AnemometerFilter::push(const WindSample& raw) {
  if (count_ == span_) {
    const WindSample& old = ring_[next_];
    sum_speed_ -= old.speed;
    sum_cos_ -= std::cos(old.angle);
    sum_sin_ -= std::sin(old.angle);
  } else {
    ++count_;
  }
  ring_[next_] = raw;
  next_ = (next_ + 1) % span_;
  sum_speed_ += raw.speed;
  sum_cos_ += std::cos(raw.angle);
  sum_sin_ += std::sin(raw.angle);

  // Recompute from the ring occasionally so running sums do not drift.
  if (next_ == 0) {
    sum_speed_ = sum_cos_ = sum_sin_ = 0.0;
    for (std::size_t i = 0; i < count_; ++i) {
      sum_speed_ += ring_[i].speed;
      sum_cos_ += std::cos(ring_[i].angle);
      sum_sin_ += std::sin(ring_[i].angle);
    }
  }

  WindSample out;
  out.t = raw.t;
  out.speed = sum_speed_ / static_cast<double>(count_);
  out.angle = (sum_cos_ == 0.0 && sum_sin_ == 0.0) ? raw.angle : wrap_angle(std::atan2(sum_sin_, sum_cos_));
  return out;
}

std::vector<WindSample> anemometer_filter(std::span<const WindSample> raw, std::size_t span) {
  AnemometerFilter f(span);
  std::vector<WindSample> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(f.push(s));
  return out;
}

Wrench current_wrench(const CurrentParams& cp, const VehicleState& st, const VehicleParams& p,
                      double t) {
  const double c = cp.speed_at(t);
  const Vec3 flow_earth(c * std::cos(cp.direction), c * std::sin(cp.direction), 0.0);
  Vec3 rel = rotation_matrix(st.eta(2)).transpose() * flow_earth;
  rel(0) -= st.nu(0);
  rel(1) -= st.nu(1);
  rel(2) = 0.0;
  return Wrench::from(linear_drag_matrix(p) * rel);
}

void write_wind_csv(const std::filesystem::path& path, const WindSeries& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open wind trace for writing: " + path.string());
  os << "t,V,direction_deg\n";
  char buf[64];
  auto put = [&](double x) {
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    os.write(buf, res.ptr - buf);
  };
  for (std::size_t k = 0; k < series.samples.size(); ++k) {
    put(series.dt * static_cast<double>(k));
    os << ',';
    put(series.samples[k].speed);
    os << ',';
    put(rad2deg(series.samples[k].direction));
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

WindSeries read_wind_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open wind trace: " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("t,V,direction_deg", 0) != 0)
    throw ConfigError(path.string() + ":1: expected header 't,V,direction_deg'");

  std::vector<double> times;
  WindSeries out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    double vals[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 3; ++i) {
      auto res = std::from_chars(p, end, vals[i]);
      if (res.ec != std::errc())
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
      p = res.ptr;
      if (i < 2) {
        if (p == end || *p != ',')
          throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
        ++p;
      }
    }
    times.push_back(vals[0]);
    out.samples.push_back({vals[1], deg2rad(vals[2])});
  }
  if (out.samples.size() < 2) throw ConfigError(path.string() + ": wind trace needs >= 2 rows");
  out.dt = times[1] - times[0];
  if (!(out.dt > 0.0)) throw ConfigError(path.string() + ": timestamps must increase");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs(times[k] - times[0] - out.dt * static_cast<double>(k)) > 1e-6 * out.dt * static_cast<double>(k))
      throw ConfigError(path.string() + ": wind trace must be uniformly sampled");
  }
  return out;
}

}  // namespace usv
