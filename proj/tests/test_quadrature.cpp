#include <doctest.h>

#include <cmath>

#include "ppd/quadrature.hpp"

using namespace ppd;

TEST_CASE("polynomial and trig integrals") {
  auto sq = [](double x) { return x * x; };
  CHECK(integrate_gk_checked(sq, 0.0, 1.0, 1e-10) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  auto s = [](double x) { return std::sin(x); };
  CHECK(integrate_gk_checked(s, 0.0, M_PI, 1e-10) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("standard normal density integrates to one") {
  auto f = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  CHECK(integrate_gk_checked(f, -9.0, 9.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("peaked integrand needs adaptive splitting") {
  // narrow Gaussian bump away from the interval midpoint
  auto f = [](double x) { return std::exp(-0.5 * (x - 0.831) * (x - 0.831) / 1e-4); };
  double want = std::sqrt(2.0 * M_PI * 1e-4);
  CHECK(integrate_gk_checked(f, 0.0, 1.0, 1e-10) == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("nonconvergence is reported") {
  auto rough = [](double x) { return x == 0.0 ? 0.0 : std::sin(1.0 / x); };
  QuadResult r = integrate_gk(rough, 0.0, 1.0, 1e-14, 8);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate_gk_checked(rough, 0.0, 1.0, 1e-14), std::runtime_error);
}

TEST_CASE("empty interval") {
  auto f = [](double x) { return x; };
  QuadResult r = integrate_gk(f, 2.0, 2.0, 1e-10);
  CHECK(r.converged);
  CHECK(r.value == 0.0);
}
