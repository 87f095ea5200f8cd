#include "melnikov/ode.hpp"

#include <doctest.h>

#include <cmath>

using namespace melnikov;

TEST_CASE("harmonic oscillator over many periods") {
  auto f = [](double, const Vec& y) {
    Vec d(2);
    d << y[1], -y[0];
    return d;
  };
  Vec y0(2);
  y0 << 1.0, 0.0;
  const double T = 20 * kTwoPi;
  OdeOptions opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-13;
  const OdeResult r = integrate_dop853(f, 0.0, y0, T, opt);
  CHECK(std::abs(r.y[0] - 1.0) < 1e-10);
  CHECK(std::abs(r.y[1]) < 1e-10);
  CHECK(r.accepted > 0);
}

TEST_CASE("eighth order convergence with fixed steps") {
  // y' = y cos t, y = exp(sin t)
  auto f = [](double t, const Vec& y) { return Vec(y * std::cos(t)); };
  Vec y0 = Vec::Ones(1);
  auto err = [&](double h) {
    OdeOptions opt;
    opt.abs_tol = 1e3;
    opt.rel_tol = 1e3;
    opt.initial_step = h;
    opt.max_step = h;
    return std::abs(integrate_dop853(f, 0.0, y0, 4.0, opt).y[0] - std::exp(std::sin(4.0)));
  };
  const double e1 = err(0.4), e2 = err(0.2);
  CHECK(std::log2(e1 / e2) > 7.0);
}

TEST_CASE("backward integration returns to the start") {
  auto f = [](double t, const Vec& y) {
    Vec d(2);
    d << y[1], -std::sin(y[0]) + 0.1 * std::cos(t);
    return d;
  };
  Vec y0(2);
  y0 << 0.4, -0.2;
  OdeOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-13;
  const Vec y1 = integrate_dop853(f, 0.0, y0, 7.0, opt).y;
  const Vec back = integrate_dop853(f, 7.0, y1, 0.0, opt).y;
  CHECK((back - y0).norm() < 1e-10);
}

TEST_CASE("observer sees monotone times and can abort") {
  auto f = [](double, const Vec& y) { return Vec(y); };
  double last = -1.0;
  bool monotone = true;
  OdeOptions opt;
  integrate_dop853(f, 0.0, Vec::Ones(1), 2.0, opt, [&](double t, const Vec&) {
    monotone = monotone && t > last;
    last = t;
  });
  CHECK(monotone);
  CHECK(last == doctest::Approx(2.0));
  CHECK_THROWS_AS(integrate_dop853(f, 0.0, Vec::Ones(1), 10.0, opt,
                                   [](double t, const Vec&) {
                                     if (t > 1.0) throw DomainError("left", t);
                                   }),
                  DomainError);
}

TEST_CASE("step budget") {
  auto f = [](double, const Vec& y) { return Vec(-1e6 * y); };
  OdeOptions opt;
  opt.max_steps = 50;
  CHECK_THROWS_AS(integrate_dop853(f, 0.0, Vec::Ones(1), 10.0, opt), NumericError);
}
