#include "fixtures.hpp"

#include <doctest.h>

#include <random>

using namespace melnikov;
using namespace fx;

TEST_CASE("factor values") {
  const Layout L{1, 1, 1};
  Vec z(5);
  z << 0.3, 0.25, 0.7, 0.1, 0.4;
  CHECK(Factor::cos({{Q(), 1.0}}).value(L, z) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(Factor::sin({{Q(), 1.0}}).value(L, z) == doctest::Approx(1.0));
  CHECK(Factor::cos({{Phi(), 1.0}, {Eta(), -1.0}}, 0.25).value(L, z) ==
        doctest::Approx(std::cos(kTwoPi * (0.1 - 0.4 + 0.25))));
  CHECK(Factor::power(I(), 3).value(L, z) == doctest::Approx(0.343));
  CHECK(Factor::sech(Eta(), 2.0, 0.1).value(L, z) == doctest::Approx(1.0 / std::cosh(0.6)));
  CHECK(Factor::gauss(P(), 3.0).value(L, z) == doctest::Approx(std::exp(-0.27)));
}

TEST_CASE("expression gradient matches central differences") {
  const Layout L{2, 1, 2};
  Expression e({Term{0.7, {Factor::cos({{Q(0), 1.0}, {Q(1), 2.0}}), Factor::power(P(1), 2)}},
                Term{-1.3, {Factor::sin({{Phi(), 1.0}, {Eta(1), 3.0}}, 0.2), Factor::sech(Eta(0), 1.5, 0.3)}},
                Term{0.4, {Factor::gauss(I(), 2.0, 0.1), Factor::power(P(0), 1)}}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z(L.size());
    for (int k = 0; k < z.size(); ++k) z[k] = u(rng);
    const Vec g = e.gradient(L, z);
    for (int k = 0; k < z.size(); ++k) {
      Vec a = z, b = z;
      a[k] += 1e-6;
      b[k] -= 1e-6;
      const double fd = (e.value(L, a) - e.value(L, b)) / 2e-6;
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("dependence queries") {
  Expression e({Term{1.0, {Factor::cos({{Q(), 1.0}}), Factor::cos({{Eta(), 1.0}})}}});
  CHECK(e.depends_on(VarKind::Q));
  CHECK(e.depends_on(VarKind::Eta));
  CHECK_FALSE(e.depends_on(VarKind::P));
  CHECK_FALSE(e.depends_on(VarKind::Phi));
  CHECK(Expression::zero().is_zero());
}

TEST_CASE("validation rejects bad variables and non-integer angle frequencies") {
  const Layout L{1, 1, 1};
  CHECK_THROWS_AS(Expression({Term{1.0, {Factor::cos({{Q(1), 1.0}})}}}).validate(L, false, "h"), ConfigError);
  CHECK_THROWS_AS(Expression({Term{1.0, {Factor::cos({{Q(), 0.5}})}}}).validate(L, false, "h"), ConfigError);
  CHECK_THROWS_AS(Expression({Term{1.0, {Factor::power(Phi(), 2)}}}).validate(L, false, "h"), ConfigError);
  CHECK_NOTHROW(Expression({Term{1.0, {Factor::cos({{Eta(), 0.5}})}}}).validate(L, false, "h"));
  CHECK_THROWS_AS(Expression({Term{1.0, {Factor::cos({{Eta(), 0.5}})}}}).validate(L, true, "h"), ConfigError);
}

TEST_CASE("variable names") {
  CHECK(var_name({VarKind::Eta, 0}, true) == "t");
  CHECK(var_name({VarKind::Eta, 1}, false) == "eta2");
  CHECK(parse_var("phi1", false) == Var{VarKind::Phi, 0});
  CHECK(parse_var("t", true) == Var{VarKind::Eta, 0});
  CHECK_THROWS_AS(parse_var("x1", false), ConfigError);
}
