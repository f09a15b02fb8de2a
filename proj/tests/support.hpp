// Seeded generators for property tests.
#pragma once

#include "usv/vehicle.hpp"

#include <cstdint>
#include <random>

namespace usv::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 vec3(const Vec3& bound) {
    return {uniform(-bound(0), bound(0)), uniform(-bound(1), bound(1)),
            uniform(-bound(2), bound(2))};
  }

  VehicleState state(double pos = 10.0, double speed = 1.5, double yaw_rate = 0.5) {
    VehicleState s;
    s.eta = {uniform(-pos, pos), uniform(-pos, pos), uniform(-3.14159, 3.14159)};
    s.nu = {uniform(-speed, speed), uniform(-speed, speed), uniform(-yaw_rate, yaw_rate)};
    return s;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace usv::testing
