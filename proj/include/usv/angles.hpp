#pragma once

#include <cmath>
#include <numbers>

namespace usv {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace usv
