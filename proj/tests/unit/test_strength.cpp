#include <cmath>
#include <limits>

#include "cumdamage/error.hpp"
#include "cumdamage/strength.hpp"
#include "doctest.h"

using namespace cumdamage;

TEST_CASE("strength_at examples") {
  CHECK(strength_at(ExponentialDecayStrength(100, 0.1), 0) == 100);
  CHECK(strength_at(LinearStrength(50, 1), 60) == 0);
  CHECK(strength_at(ExponentialDecayStrength(100, 0.041), 73.41) ==
        doctest::Approx(4.93).epsilon(1e-3));
  CHECK(strength_at(ConstantStrength(10), 1e9) == 10);
}

TEST_CASE("crossing_time examples") {
  CHECK(*crossing_time(ExponentialDecayStrength(100, 0.1), 50) ==
        doctest::Approx(std::log(2.0) / 0.1).epsilon(1e-14));
  CHECK_FALSE(crossing_time(ConstantStrength(10), 5).has_value());
  CHECK(*crossing_time(LinearStrength(50, 1), 20) == doctest::Approx(30).epsilon(1e-14));
  CHECK(*crossing_time(ConstantStrength(10), 10) == 0);
  CHECK(*crossing_time(LinearStrength(50, 1), 0) == 50);
  CHECK_FALSE(crossing_time(ExponentialDecayStrength(100, 0.1), 0).has_value());
}

TEST_CASE("z_horizon examples") {
  CHECK(z_horizon(ExponentialDecayStrength(100, 0.1), 2.51) ==
        doctest::Approx(36.85).epsilon(1e-3));
  CHECK(std::isinf(z_horizon(ConstantStrength(10), 7.93)));
  CHECK(z_horizon(LinearStrength(60, 1), 30.25) == doctest::Approx(29.75).epsilon(1e-14));
  CHECK_THROWS_AS(z_horizon(LinearStrength(50, 1), 51), InvalidLevelError);
  CHECK_THROWS_AS(z_horizon(ConstantStrength(10), 10.5), InvalidLevelError);
}

TEST_CASE("zero_time") {
  CHECK(zero_time(LinearStrength(50, 2)) == 25);
  CHECK(std::isinf(zero_time(ExponentialDecayStrength(100, 0.1))));
  CHECK(std::isinf(zero_time(ConstantStrength(1))));
}

TEST_CASE("constructors reject invalid curves") {
  CHECK_THROWS_AS(ConstantStrength(0), ValidationError);
  CHECK_THROWS_AS(LinearStrength(-1, 1), ValidationError);
  CHECK_THROWS_AS(LinearStrength(50, -1), ValidationError);
  CHECK_THROWS_AS(ExponentialDecayStrength(100, -0.1), ValidationError);
  CHECK_THROWS_AS(ExponentialDecayStrength(0, 0.1), ValidationError);
}

TEST_CASE("crossing_time inverts strength_at and is non-increasing in level") {
  const StrengthCurve curves[] = {ConstantStrength(10), LinearStrength(50, 1), LinearStrength(60, 0.7),
                                  ExponentialDecayStrength(100, 0.1),
                                  ExponentialDecayStrength(5, 0.041)};
  for (const auto& curve : curves) {
    const double k0 = initial_strength(curve);
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 200; ++i) {
      const double level = k0 * i / 200.0;
      const auto t = crossing_time(curve, level);
      if (t) {
        CHECK(strength_at(curve, *t) == doctest::Approx(level).epsilon(1e-9));
        CHECK(*t <= previous);
        previous = *t;
      } else {
        CHECK(std::isinf(previous));
      }
    }
  }
}

TEST_CASE("strength is non-increasing and the modified level is min(Z, K)") {
  const StrengthCurve curves[] = {ConstantStrength(10), LinearStrength(50, 1),
                                  ExponentialDecayStrength(100, 0.1)};
  for (const auto& curve : curves) {
    const double k0 = initial_strength(curve);
    for (double frac : {0.05, 0.3, 0.9, 1.0}) {
      const double Z = frac * k0;
      const double t0 = z_horizon(curve, Z);
      double previous = k0;
      for (int i = 0; i <= 400; ++i) {
        const double t = 0.25 * i;
        const double k = strength_at(curve, t);
        CHECK(k <= previous);
        CHECK(k >= 0);
        previous = k;
        const double mod = modified_level(curve, Z, t);
        CHECK(mod == doctest::Approx(std::min(Z, k)).epsilon(1e-12));
        if (t <= t0) CHECK(mod == doctest::Approx(Z).epsilon(1e-12));
      }
    }
  }
}
