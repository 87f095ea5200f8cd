#pragma once

// Independent reference values. None of these call into the quadrature,
// Newton or shooting code under test.

#include "melnikov/model.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

using melnikov::Vec;
inline constexpr double pi = std::numbers::pi;

/// int sech^2(s) cos(2 pi a s) ds scaled: K(a) = 2 pi^2 a / sinh(pi^2 a), K(0) = 2.
inline double K(double a) { return a == 0.0 ? 2.0 : 2.0 * pi * pi * a / std::sinh(pi * pi * a); }

/// Potential of the reference instance (cos 2pi q0(s) - 1 = -2 sech^2 s).
inline double ref_potential(double tau, double I, double phi, double t) {
  return 2.0 * (std::cos(2 * pi * (phi - tau * I)) * K(I) + std::cos(2 * pi * (t - tau)) * K(1.0));
}

inline double ref_dtau(double tau, double I, double phi, double t) {
  return 2.0 * (2 * pi * I * std::sin(2 * pi * (phi - tau * I)) * K(I) + 2 * pi * std::sin(2 * pi * (t - tau)) * K(1.0));
}

inline double ref_dphi(double tau, double I, double phi, double t) {
  return -4.0 * pi * std::sin(2 * pi * (phi - tau * I)) * K(I);
}

/// Cosine pendulum with lambda = 1 on its upper separatrix.
inline double sep_p(double s) { return 1.0 / (pi * std::cosh(s)); }
inline double sep_q(double s) { return 2.0 / pi * std::atan(std::exp(s)); }

/// Trapezoid rule on [-L, L] with step h, applied to the reference
/// potential integrand built from the explicit separatrix.
inline double ref_potential_trapezoid(double tau, double I, double phi, double t, double L = 40.0,
                                      double h = 2e-3) {
  auto f = [&](double s) {
    const double q = sep_q(tau + s);
    const double dh = (std::cos(2 * pi * q) - 1.0) * (std::cos(2 * pi * (phi + s * I)) + std::cos(2 * pi * (t + s)));
    return -dh;
  };
  const int N = static_cast<int>(std::lround(2 * L / h));
  double sum = 0.5 * (f(-L) + f(L));
  for (int k = 1; k < N; ++k) sum += f(-L + k * h);
  return sum * h;
}

/// Bisection for a sign change of f on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15) {
  double fa = f(a);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Poisson bracket {P_i, h} = dP/dq dh/dp - dP/dp dh/dq by central differences
/// of the scalar functions only.
inline double fd_poisson(const melnikov::SystemConfig& cfg, int i, const Vec& z, double step = 1e-6) {
  const melnikov::Layout L = cfg.layout();
  const auto& h = cfg.perturbation.hamiltonian();
  auto dh = [&](int k) {
    Vec a = z, b = z;
    a[k] += step;
    b[k] -= step;
    return (h.value(L, a) - h.value(L, b)) / (2 * step);
  };
  auto dP = [&](bool wrt_p) {
    const double p = z[L.p(i)], q = z[L.q(i)];
    const double dp = wrt_p ? step : 0.0, dq = wrt_p ? 0.0 : step;
    return (melnikov::pendulum_energy(cfg.penduli, i, p + dp, q + dq) -
            melnikov::pendulum_energy(cfg.penduli, i, p - dp, q - dq)) /
           (2 * step);
  };
  return dP(false) * dh(L.p(i)) - dP(true) * dh(L.q(i));
}

}  // namespace oracle
