#include "melnikov/verify.hpp"

#include "melnikov/ode.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace melnikov {

namespace {

OdeOptions ode_options(const IntegratorConfig& icfg) {
  OdeOptions o;
  o.abs_tol = icfg.abs_tol;
  o.rel_tol = icfg.rel_tol;
  o.max_step = icfg.max_step;
  return o;
}

Vec energies(const SystemConfig& cfg, const Vec& z) {
  const Layout L = cfg.layout();
  Vec P(L.n);
  for (int i = 0; i < L.n; ++i) P[i] = pendulum_energy(cfg.penduli, i, z[L.p(i)], z[L.q(i)]);
  return P;
}

double horizon(const SeparatrixOrbit& orb, double eps, const ShootOptions& opt) {
  return opt.horizon_c * std::log(1.0 / std::abs(eps)) / orb.lambda_plus();
}

GraphPoint graph_value(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                       double eps, const ShootOptions& opt, double direction) {
  const int n = cfg.layout().n;
  GraphPoint g;
  g.tau = tau;
  g.phase = ph;
  g.P = Vec::Zero(n);
  if (eps == 0.0) return g;
  if (!(opt.horizon_c > 0.0)) throw std::invalid_argument("horizon constant must be positive");

  const double lp = orb.lambda_plus();
  const double T_final = horizon(orb, eps, opt);

  // The comparison orbit starts at the saddle of every pendulum; its energies
  // stay zero, so the shooting residual is the energy at the horizon.
  auto F = [&](const Vec& P, double T) {
    const AugmentedState x = chart_to_state(cfg, orb, P, tau, ph);
    return energies(cfg, flow(cfg, x.raw(), direction * T, eps, opt.integrator));
  };

  std::vector<double> ladder;
  for (double T = 1.0 / lp; T < T_final; T += 1.0 / lp) ladder.push_back(T);
  ladder.push_back(T_final);

  Vec P = g.P;
  Vec r;
  for (double T : ladder) {
    const double h = 1e-3 * std::exp(-lp * T);
    r = F(P, T);
    for (int it = 0; it < opt.max_newton; ++it) {
      Mat J(n, n);
      for (int j = 0; j < n; ++j) {
        Vec Pj = P;
        Pj[j] += h;
        J.col(j) = (F(Pj, T) - r) / h;
      }
      const Vec dP = J.colPivHouseholderQr().solve(r);
      if (!dP.allFinite()) throw NumericError("singular shooting Jacobian");
      double step = 1.0;
      Vec Pn, rn;
      for (int k = 0;; ++k) {
        Pn = P - step * dP;
        try {
          rn = F(Pn, T);
          break;
        } catch (const Error&) {
          if (k >= 30) throw;
          step *= 0.5;
        }
      }
      P = Pn;
      r = rn;
      ++g.newton_iterations;
      const double size = step * dP.lpNorm<Eigen::Infinity>();
      if (size < 1e-14 * std::max(1.0, P.lpNorm<Eigen::Infinity>()) + 1e-16) break;
    }
  }
  g.P = P;
  g.horizon = direction * T_final;
  g.shoot_residual = r.lpNorm<Eigen::Infinity>();
  return g;
}

}  // namespace

Vec flow(const SystemConfig& cfg, const Vec& z, double duration, double eps, const IntegratorConfig& icfg) {
  if (duration == 0.0) return z;
  if (!in_domain(cfg, z)) throw DomainError("initial state outside the domain", 0.0);
  auto rhs = [&](double, const Vec& y) {
    Vec f = unperturbed_field(cfg, y);
    if (eps != 0.0) f += eps * perturbation_field(cfg, y);
    return f;
  };
  auto check = [&](double t, const Vec& y) {
    if (!y.allFinite() || !in_domain(cfg, y)) throw DomainError("orbit left the domain", t);
  };
  return integrate_dop853(rhs, 0.0, z, duration, ode_options(icfg), check).y;
}

Vec inner_flow(const SystemConfig& cfg, const Vec& z, double duration, double eps, const IntegratorConfig& icfg) {
  const Layout L = cfg.layout();
  Vec z0 = z;
  z0.segment(0, 2 * L.n).setZero();
  if (duration == 0.0) return z0;
  auto rhs = [&](double, const Vec& y) {
    Vec f = unperturbed_field(cfg, y);
    if (eps != 0.0) f += eps * perturbation_field(cfg, y);
    f.segment(0, 2 * L.n).setZero();
    return f;
  };
  auto check = [&](double t, const Vec& y) {
    if (!y.allFinite() || !in_domain(cfg, y)) throw DomainError("orbit left the domain", t);
  };
  return integrate_dop853(rhs, 0.0, z0, duration, ode_options(icfg), check).y;
}

AugmentedState integrate(const SystemConfig& cfg, const AugmentedState& x, double t0, double t1, double eps,
                         const IntegratorConfig& icfg) {
  AugmentedState out(x.layout(), Vec());
  try {
    out.raw() = flow(cfg, x.raw(), t1 - t0, eps, icfg);
  } catch (const DomainError& e) {
    throw DomainError(e.what(), t0 + e.time);
  }
  out.normalize(cfg.clock);
  return out;
}

AugmentedState chart_to_state(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& P, const Vec& tau,
                              const Phase& ph) {
  const Layout L = cfg.layout();
  if (P.size() != L.n || tau.size() != L.n) throw std::invalid_argument("chart coordinates have the wrong size");
  Vec z = inner_state(cfg, ph, 0.0);
  const FamilyPoint f = family_point(orb, tau, 0.0);
  for (int i = 0; i < L.n; ++i) {
    if (std::abs(P[i]) > cfg.tube()) throw ChartError("energy level outside the tube");
    const double p0 = f.p[i], q0 = f.dq[i];
    const Eigen::Vector2d g = pendulum_energy_gradient(cfg.penduli, i, p0, q0);
    const double gn = g.norm();
    if (gn < 1e-8) throw ChartError("chart degenerate near the saddle");
    const Eigen::Vector2d u = g / gn;
    auto G = [&](double r) { return pendulum_energy(cfg.penduli, i, p0 + r * u[0], q0 + r * u[1]) - P[i]; };
    auto dG = [&](double r) { return pendulum_energy_gradient(cfg.penduli, i, p0 + r * u[0], q0 + r * u[1]).dot(u); };

    double r = 0.0;
    double gr = G(r);
    if (gr != 0.0) {
      // bracket the level along the normal line, then safeguarded Newton
      double step = std::abs(gr) / gn;
      const double dir = gr < 0.0 ? 1.0 : -1.0;
      double a = 0.0, b = dir * step;
      int k = 0;
      while (G(b) * gr > 0.0) {
        a = b;
        step *= 2.0;
        b = dir * step;
        if (++k > 60 || step > 1.0) throw ChartError("energy level not reached along the normal line");
      }
      double lo = std::min(a, b), hi = std::max(a, b);
      double glo = G(lo);
      r = 0.5 * (lo + hi);
      for (int it = 0; it < 100; ++it) {
        const double v = G(r);
        if (std::abs(v) <= 1e-15 * std::max(1.0, std::abs(P[i])) || hi - lo < 1e-16) break;
        if ((v < 0.0) == (glo < 0.0)) {
          lo = r;
          glo = v;
        } else {
          hi = r;
        }
        const double d = dG(r);
        double rn = d != 0.0 ? r - v / d : 0.5 * (lo + hi);
        if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
        r = rn;
      }
      if (std::abs(G(r)) > 1e-12) throw ChartError("chart level solve did not converge");
    }
    z[L.p(i)] = p0 + r * u[0];
    z[L.q(i)] = q0 + r * u[1];
  }
  AugmentedState x(L, z);
  return x;
}

ChartCoords state_to_chart(const SystemConfig& cfg, const SeparatrixOrbit& orb, const AugmentedState& x,
                           const Vec& tau_guess) {
  const Layout L = cfg.layout();
  ChartCoords c;
  c.P = energies(cfg, x.raw());
  c.tau = tau_guess;
  for (int i = 0; i < L.n; ++i) {
    const PendulumSeparatrix& curve = orb.curve(i);
    const double p = x.raw()[L.p(i)], q = x.raw()[L.q(i)];
    auto g = [&](double s) {
      const OrbitSample o = curve.eval(s);
      return (p - o.p) * o.dp_ds + centered(q - o.dq) * o.ddq_ds;
    };
    double s0 = tau_guess[i], s1 = tau_guess[i] + 1e-3 / orb.lambda(i);
    double g0 = g(s0), g1 = g(s1);
    for (int it = 0; it < 100 && g1 != g0; ++it) {
      const double s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
      s0 = s1;
      g0 = g1;
      s1 = s2;
      g1 = g(s1);
      if (std::abs(s1 - s0) < 1e-14 * std::max(1.0, std::abs(s1))) break;
    }
    if (!std::isfinite(s1)) throw ChartError("no foot point on the separatrix");
    c.tau[i] = s1;
  }
  return c;
}

GraphPoint stable_graph_value(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                              double eps, const ShootOptions& opt) {
  return graph_value(cfg, orb, tau, ph, eps, opt, 1.0);
}

GraphPoint unstable_graph_value(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                                const Phase& ph, double eps, const ShootOptions& opt) {
  return graph_value(cfg, orb, tau, ph, eps, opt, -1.0);
}

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& residual) {
  if (eps.size() != residual.size()) throw std::invalid_argument("eps and residual lengths differ");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (eps[k] != 0.0 && residual[k] > 0.0 && std::isfinite(residual[k])) {
      x.push_back(std::log(std::abs(eps[k])));
      y.push_back(std::log(residual[k]));
    }
  }
  const int m = static_cast<int>(x.size());
  if (m < 4) throw std::invalid_argument("order fit needs at least 4 positive residuals");
  double mx = 0.0, my = 0.0;
  for (int k = 0; k < m; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < m; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("order fit needs distinct eps values");
  OrderFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (int k = 0; k < m; ++k) {
    const double e = y[k] - (f.intercept + f.slope * x[k]);
    sse += e * e;
  }
  f.slope_stderr = std::sqrt(sse / (m - 2) / sxx);
  f.points = m;
  return f;
}

SplittingReport measure_splitting(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                                  const Phase& ph, const std::vector<double>& eps_list, const ShootOptions& opt) {
  SplittingReport rep;
  rep.tau = tau;
  rep.phase = ph;
  rep.melnikov = melnikov_vector(cfg, orb, tau, ph, {1e-13, 4000}).value;
  std::vector<double> es, res, gs;
  for (double eps : eps_list) {
    SplittingRow row;
    row.eps = eps;
    row.stable = stable_graph_value(cfg, orb, tau, ph, eps, opt).P;
    row.unstable = unstable_graph_value(cfg, orb, tau, ph, eps, opt).P;
    row.measured = row.unstable - row.stable;
    row.predicted = eps * rep.melnikov;
    row.residual = (row.measured - row.predicted).lpNorm<Eigen::Infinity>();
    es.push_back(eps);
    res.push_back(row.residual);
    gs.push_back(row.stable.lpNorm<Eigen::Infinity>());
    rep.rows.push_back(std::move(row));
  }
  try {
    rep.fit = fit_order(es, res);
  } catch (const std::invalid_argument&) {
  }
  try {
    rep.graph_fit = fit_order(es, gs);
  } catch (const std::invalid_argument&) {
  }
  return rep;
}

Vec reduced_angle_derivative(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit,
                             const ReducedOptions& opt) {
  const int d = cfg.layout().d;
  Vec out(d);
  for (int j = 0; j < d; ++j) {
    double v[2];
    for (int s = 0; s < 2; ++s) {
      Phase ph = crit.context;
      ph.angle[j] += (s == 0 ? 1.0 : -1.0) * opt.step;
      const CriticalPoint c = find_critical_tau(cfg, orb, crit.tau_star, ph, opt.newton);
      if ((c.tau_star - crit.tau_star).lpNorm<Eigen::Infinity>() > opt.branch_jump)
        throw NumericError("branch loss while differentiating the reduced potential");
      v[s] = melnikov_potential(cfg, orb, c.tau_star, ph, opt.newton.quad).value;
    }
    out[j] = (v[0] - v[1]) / (2.0 * opt.step);
  }
  return out;
}

JumpRow action_jump(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit, double eps,
                    const Vec& dtheta, const JumpOptions& opt) {
  const Layout L = cfg.layout();
  const Phase& ph = crit.context;
  JumpRow row;
  row.eps = eps;
  row.predicted = eps * dtheta;

  // Homoclinic point: zero of tau -> unstable minus stable graph value,
  // by Broyden iteration started from the linearization eps * dM/dtau.
  auto G = [&](const Vec& tau) {
    GraphPoint s = stable_graph_value(cfg, orb, tau, ph, eps, opt.shoot);
    GraphPoint u = unstable_graph_value(cfg, orb, tau, ph, eps, opt.shoot);
    return std::make_pair(s, u);
  };
  Vec tau = crit.tau_star;
  Mat B = eps * crit.jacobian;
  auto [gs, gu] = G(tau);
  Vec r = gu.P - gs.P;
  for (int it = 0; it < opt.max_root_iterations; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= opt.root_residual) break;
    const Vec dt = -B.colPivHouseholderQr().solve(r);
    if (!dt.allFinite()) throw NumericError("singular homoclinic root Jacobian");
    tau += dt;
    auto [s, u] = G(tau);
    const Vec rn = u.P - s.P;
    B += (rn - r - B * dt) * dt.transpose() / dt.squaredNorm();
    r = rn;
    gs = s;
    gu = u;
    if (dt.lpNorm<Eigen::Infinity>() < opt.root_tol) break;
    if (it + 1 == opt.max_root_iterations) throw NumericError("homoclinic root search did not converge");
  }
  row.tau_homoclinic = tau;

  const double T = gs.horizon;
  const IntegratorConfig& ic = opt.shoot.integrator;
  const Vec ys = flow(cfg, chart_to_state(cfg, orb, gs.P, tau, ph).raw(), T, eps, ic);
  const Vec yu = flow(cfg, chart_to_state(cfg, orb, gu.P, tau, ph).raw(), -T, eps, ic);
  const Vec xp = inner_flow(cfg, ys, -T, eps, ic);
  const Vec xm = inner_flow(cfg, yu, T, eps, ic);
  row.measured = xp.segment(L.action(0), L.d) - xm.segment(L.action(0), L.d);
  const Vec diff = row.measured - row.predicted;
  row.residual = diff.lpNorm<Eigen::Infinity>();
  const double scale = row.predicted.lpNorm<Eigen::Infinity>();
  row.relative_error = scale > 0.0 ? row.residual / scale : std::numeric_limits<double>::infinity();
  return row;
}

JumpReport measure_jump(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit,
                        const std::vector<double>& eps_list, const JumpOptions& opt) {
  if (!crit.nondegenerate()) throw DegenerateError("critical point is degenerate");
  JumpReport rep;
  rep.critical = crit;
  rep.dtheta = reduced_angle_derivative(cfg, orb, crit, opt.reduced);
  std::vector<double> es, res;
  for (double eps : eps_list) {
    rep.rows.push_back(action_jump(cfg, orb, crit, eps, rep.dtheta, opt));
    es.push_back(eps);
    res.push_back(rep.rows.back().residual);
  }
  try {
    rep.fit = fit_order(es, res);
  } catch (const std::invalid_argument&) {
  }
  return rep;
}

}  // namespace melnikov
