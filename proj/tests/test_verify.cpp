#include "melnikov/verify.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace melnikov;
using namespace fx;

namespace {

Phase phase(double I, double phi, double t) {
  return {Vec::Constant(1, I), Vec::Constant(1, phi), Vec::Constant(1, t)};
}
Vec v1(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST_CASE("unperturbed flow on the inner manifold") {
  const SystemConfig cfg = reference();
  const Layout L = cfg.layout();
  const AugmentedState x = AugmentedState::make(L, Vec::Zero(1), Vec::Zero(1), v1(0.2), v1(0.9), v1(0.0));
  const AugmentedState y = integrate(cfg, x, 0.0, 7.0, 0.0);
  CHECK(std::abs(y.p()[0]) <= 1e-10);
  CHECK(circle_dist(y.q()[0], 0.0) <= 1e-10);
  CHECK(y.action()[0] == 0.2);
  CHECK(circle_dist(y.angle()[0], 0.9 + 0.2 * 7.0) <= 1e-12);
  CHECK(y.eta()[0] == doctest::Approx(7.0));
}

TEST_CASE("the separatrix is an orbit of the unperturbed flow") {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const AugmentedState x = chart_to_state(cfg, orb, v1(0.0), v1(-5.0), phase(0.2, 0.0, 0.0));
  const AugmentedState y = integrate(cfg, x, 0.0, 10.0, 0.0);
  const FamilyPoint f = family_point(orb, v1(5.0), 0.0);
  CHECK(std::abs(y.p()[0] - f.p[0]) <= 1e-8);
  CHECK(circle_dist(y.q()[0], f.q[0]) <= 1e-8);
}

TEST_CASE("reverse integration and conservation") {
  const SystemConfig cfg = reference();
  const Layout L = cfg.layout();
  const AugmentedState x = AugmentedState::make(L, v1(0.05), v1(0.2), v1(0.3), v1(0.1), v1(0.4));
  const AugmentedState y = integrate(cfg, x, 0.0, 6.0, 1e-3);
  const AugmentedState back = integrate(cfg, y, 6.0, 0.0, 1e-3);
  CHECK(std::abs(back.p()[0] - x.p()[0]) <= 1e-8);
  CHECK(circle_dist(back.q()[0], x.q()[0]) <= 1e-8);
  CHECK(std::abs(back.action()[0] - x.action()[0]) <= 1e-8);

  // libration inside the tube, 100 time units
  const double P0 = pendulum_energy(cfg.penduli, 0, x.p()[0], x.q()[0]);
  const AugmentedState z = integrate(cfg, x, 0.0, 100.0, 0.0);
  CHECK(std::abs(pendulum_energy(cfg.penduli, 0, z.p()[0], z.q()[0]) - P0) <= 1e-9);
}

TEST_CASE("leaving the domain reports the exit time") {
  SystemConfig cfg = reference();
  cfg.perturbation.field = HamiltonianField{Expression({Term{1.0 / kTwoPi, {Factor::sin({{Q(), 1.0}})}}})};
  cfg.domain.tube = 1e-3;
  const Layout L = cfg.layout();
  const AugmentedState x = AugmentedState::make(L, v1(0.0), v1(0.0), v1(0.3), v1(0.1), v1(0.4));
  try {
    integrate(cfg, x, 2.0, 30.0, 0.05);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.time > 2.0);
    CHECK(e.time < 30.0);
  }
}

TEST_CASE("chart coordinates") {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);

  const AugmentedState on = chart_to_state(cfg, orb, v1(0.0), v1(0.7), ph);
  const FamilyPoint f = family_point(orb, v1(0.7), 0.0);
  CHECK(on.raw()[0] == f.p[0]);
  CHECK(on.raw()[1] == f.dq[0]);

  const AugmentedState x = chart_to_state(cfg, orb, v1(1e-3), v1(0.0), ph);
  CHECK(std::abs(x.p()[0] * x.p()[0] / 2 + kA * (std::cos(kTwoPi * x.q()[0]) - 1) - 1e-3) <= 1e-12);

  for (double P : {-4e-3, 2e-3, 8e-3})
    for (double tau : {-2.0, 0.0, 1.5}) {
      const AugmentedState y = chart_to_state(cfg, orb, v1(P), v1(tau), ph);
      const ChartCoords cc = state_to_chart(cfg, orb, y, v1(tau + 0.05));
      CHECK(std::abs(cc.P[0] - P) <= 1e-10);
      CHECK(std::abs(cc.tau[0] - tau) <= 1e-10);
    }

  CHECK_THROWS_AS(chart_to_state(cfg, orb, v1(2 * cfg.tube()), v1(0.0), ph), ChartError);
  CHECK_THROWS_AS(chart_to_state(cfg, orb, v1(1e-4), v1(30.0), ph), ChartError);
}

TEST_CASE("graph values collapse at eps = 0 and for trivial fields") {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);
  CHECK(stable_graph_value(cfg, orb, v1(0.1), ph, 0.0).P[0] == 0.0);
  CHECK(unstable_graph_value(cfg, orb, v1(0.1), ph, 0.0).P[0] == 0.0);

  const SystemConfig zero = with_h(cfg, Expression::zero());
  const SplittingReport r = measure_splitting(zero, orb, v1(0.1), ph, {1e-2, 1e-3});
  for (const SplittingRow& row : r.rows) {
    CHECK(std::abs(row.measured[0]) <= 1e-13);
    CHECK(row.predicted[0] == 0.0);
  }
}

TEST_CASE("stable graph is first order and horizon independent") {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);
  const double eps = 2e-3;
  ShootOptions four;
  four.horizon_c = 4.0;
  const GraphPoint a = stable_graph_value(cfg, orb, v1(0.1), ph, eps);
  const GraphPoint b = stable_graph_value(cfg, orb, v1(0.1), ph, eps, four);
  CHECK(a.horizon == doctest::Approx(3 * std::log(1 / eps)));
  CHECK(std::abs(a.P[0] - b.P[0]) <= 10 * eps * eps);
  CHECK(a.shoot_residual <= 1e-9);

  std::vector<double> es{8e-3, 4e-3, 2e-3, 1e-3}, gs;
  for (double e : es) gs.push_back(std::abs(stable_graph_value(cfg, orb, v1(0.1), ph, e).P[0]));
  const OrderFit f = fit_order(es, gs);
  CHECK(std::abs(f.slope - 1.0) <= 0.1);
}

TEST_CASE("order fit") {
  const std::vector<double> e{1e-1, 1e-2, 1e-3, 1e-4};
  const OrderFit f = fit_order(e, {3e-2, 3e-4, 3e-6, 3e-8});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  CHECK(f.slope_stderr <= 1e-12);
  CHECK(f.points == 4);
  CHECK_THROWS_AS(fit_order({1e-1, 1e-2, 1e-3}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(e, {1.0, 0.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("no action jump without angle dependence") {
  const SystemConfig cfg = with_h(reference(), Expression({Term{1.0, {c(Q()), c(Eta())}}}));
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const CriticalPoint cp = locate_critical_tau(cfg, orb, phase(0.2, 0.1, 0.3));
  REQUIRE(cp.nondegenerate());
  const JumpReport r = measure_jump(cfg, orb, cp, {2e-3});
  CHECK(std::abs(r.dtheta[0]) <= 1e-12);
  CHECK(r.rows[0].predicted[0] == 0.0);
  CHECK(std::abs(r.rows[0].measured[0]) <= 1e-14);
}
