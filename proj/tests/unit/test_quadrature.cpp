#include <cmath>
#include <numbers>

#include "cumdamage/error.hpp"
#include "cumdamage/quadrature.hpp"
#include "doctest.h"

using namespace cumdamage;

TEST_CASE("smooth integrands") {
  CHECK(integrate([](double x) { return 3 * x * x; }, 0, 2).value == doctest::Approx(8).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0, 40).value ==
        doctest::Approx(1 - std::exp(-40.0)).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(50 * x); }, 0, std::numbers::pi / 2).value ==
        doctest::Approx((1 - std::cos(25 * std::numbers::pi)) / 50).epsilon(1e-10));
  CHECK(integrate([](double) { return 1.0; }, 3, 3).value == 0);
}

TEST_CASE("singular and kinked integrands") {
  const auto r = integrate([](double x) { return 1 / std::sqrt(x); }, 0, 1);
  CHECK(r.value == doctest::Approx(2).epsilon(1e-8));
  CHECK(r.error <= 1e-8 * 2 + 1e-10);

  const auto kink = [](double x) { return std::abs(x - 1.0 / 3.0); };
  const double exact = (1.0 / 9 + 4.0 / 9) / 2;
  const auto plain = integrate(kink, 0, 1);
  const auto split = integrate(kink, 0, 1, {}, {1.0 / 3.0});
  CHECK(plain.value == doctest::Approx(exact).epsilon(1e-8));
  CHECK(split.value == doctest::Approx(exact).epsilon(1e-14));
  CHECK(split.evaluations < plain.evaluations);
}

TEST_CASE("breakpoints outside the interval are ignored") {
  const auto r = integrate([](double x) { return x; }, 0, 1, {}, {-1.0, 0.5, 2.0});
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("unattainable tolerance raises NumericalError") {
  QuadratureOptions tight;
  tight.abs_tol = 0;
  tight.rel_tol = 1e-14;
  tight.max_intervals = 20;
  CHECK_THROWS_AS(integrate([](double x) { return 1 / x; }, 0, 1, tight), NumericalError);
}
