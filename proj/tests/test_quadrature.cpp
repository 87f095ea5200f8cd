#include "melnikov/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace melnikov;

TEST_CASE("polynomials are integrated exactly") {
  auto f = [](double x) { return 3 * std::pow(x, 10) - x * x + 1.0; };
  const auto r = integrate_gk15(f, -1.0, 2.0);
  const double exact = 3.0 / 11 * (std::pow(2.0, 11) + 1) - 3.0 + 3.0;
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-14));
  CHECK(r.converged);
}

TEST_CASE("sech squared against its closed form") {
  auto f = [](double s) { return std::cos(3.0 * s) / (std::cosh(s) * std::cosh(s)); };
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  const auto r = integrate_gk15(f, -40.0, 40.0, opt);
  const double pi = std::numbers::pi;
  const double exact = pi * 3.0 / std::sinh(pi * 3.0 / 2);
  CHECK(std::abs(r.value - exact) < 1e-12);
  CHECK(r.error <= 1e-13);
}

TEST_CASE("vector integrands") {
  auto f = [](double x) {
    Vec v(2);
    v << std::exp(x), std::sin(x);
    return v;
  };
  const auto r = integrate_gk15(f, 0.0, 1.0);
  CHECK(r.value[0] == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(r.value[1] == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-14));
}

TEST_CASE("reported error is honest for a peaked integrand") {
  auto f = [](double x) { return 1.0 / (1e-4 + x * x); };
  QuadOptions opt;
  opt.abs_tol = 1e-9;
  const auto r = integrate_gk15(f, -1.0, 1.0, opt);
  const double exact = 2.0 / 1e-2 * std::atan(1.0 / 1e-2);
  CHECK(std::abs(r.value - exact) <= std::max(r.error, 1e-9));
  CHECK(r.converged);
}

TEST_CASE("segment budget is reported") {
  auto f = [](double x) { return std::sin(1.0 / (x + 1e-9)); };
  QuadOptions opt;
  opt.abs_tol = 1e-14;
  opt.max_segments = 20;
  const auto r = integrate_gk15(f, 0.0, 1.0, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.segments <= 20);
}
