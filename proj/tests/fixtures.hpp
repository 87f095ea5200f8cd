#pragma once

#include "melnikov/model.hpp"

#include <numbers>

namespace fx {

using namespace melnikov;

inline constexpr double kA = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);  // lambda = 1

inline Var P(int i = 0) { return {VarKind::P, i}; }
inline Var Q(int i = 0) { return {VarKind::Q, i}; }
inline Var I(int j = 0) { return {VarKind::I, j}; }
inline Var Phi(int j = 0) { return {VarKind::Phi, j}; }
inline Var Eta(int k = 0) { return {VarKind::Eta, k}; }

inline Factor c(Var v, double a = 1.0) { return Factor::cos({{v, a}}); }

/// h = cos(2 pi q)(cos(2 pi phi) + cos(2 pi t)), cosine pendulum with lambda = 1, h0 = I^2 / 2.
inline SystemConfig reference() {
  SystemConfig cfg;
  cfg.penduli = PenduliSpec({TrigPotential::cosine(kA)}, {1});
  cfg.rotator.h0 = Polynomial::half_square(1);
  cfg.perturbation.field = HamiltonianField{Expression({Term{1.0, {c(Q()), c(Phi())}}, Term{1.0, {c(Q()), c(Eta())}}})};
  cfg.finalize();
  return cfg;
}

inline SystemConfig with_h(SystemConfig cfg, Expression h) {
  cfg.perturbation.field = HamiltonianField{std::move(h)};
  cfg.finalize();
  return cfg;
}

/// Two identical cosine penduli coupled through cos(2 pi q1) cos(2 pi q2), forced by cos(2 pi t).
inline SystemConfig two_penduli(bool coupled) {
  SystemConfig cfg;
  cfg.penduli = PenduliSpec({TrigPotential::cosine(kA), TrigPotential::cosine(kA)}, {1, 1});
  cfg.rotator.h0 = Polynomial::half_square(1);
  std::vector<Term> terms{Term{1.0, {c(Q(0)), c(Eta())}}, Term{1.0, {c(Q(1)), c(Eta())}}};
  if (coupled) terms.push_back(Term{1.0, {c(Q(0)), c(Q(1))}});
  cfg.perturbation.field = HamiltonianField{Expression(terms)};
  cfg.finalize();
  return cfg;
}

/// Linear damping X^1 = (-gamma p, 0, 0, 0) on the reference pendulum.
inline SystemConfig dissipative(double gamma) {
  SystemConfig cfg;
  cfg.penduli = PenduliSpec({TrigPotential::cosine(kA)}, {1});
  cfg.rotator.h0 = Polynomial::half_square(1);
  GeneralField g;
  g.components.assign(4, Expression::zero());
  g.components[0] = Expression({Term{-gamma, {Factor::power(P(), 1)}}});
  cfg.perturbation.field = g;
  cfg.finalize();
  return cfg;
}

}  // namespace fx
