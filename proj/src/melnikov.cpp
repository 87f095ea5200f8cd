#include "melnikov/melnikov.hpp"

#include "melnikov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace melnikov {

namespace {

void check_phase(const SystemConfig& cfg, const Phase& ph) {
  const Layout L = cfg.layout();
  if (ph.action.size() != L.d || ph.angle.size() != L.d || ph.eta.size() != L.m)
    throw std::invalid_argument("phase dimensions do not match the system");
}

void check_tau(const SeparatrixOrbit& orb, const Vec& tau) {
  if (tau.size() != orb.count()) throw std::invalid_argument("tau has the wrong dimension");
}

struct Window {
  double a = 0.0;
  double b = 0.0;
  double half_width = 0.0;
  double tail = 0.0;
};

// Truncation [a, b] such that every separatrix argument tau_i + sigma lies
// beyond +-Sigma outside it; the integrand is bounded there by
// L * 2C exp(-lambda_plus |s|), so both tails together contribute at most
// 4 L C exp(-lambda_plus Sigma) / lambda_plus <= tol / 2.
Window make_window(const SeparatrixOrbit& orb, const Vec& tau, double lipschitz, double tol, double scale) {
  const double lam = orb.lambda_plus();
  const double C = orb.decay_constant();
  Window w;
  w.half_width = 1.0 / lam;
  if (lipschitz > 0.0) w.half_width = std::max(w.half_width, std::log(8.0 * lipschitz * C / (lam * tol)) / lam);
  w.half_width *= scale;
  w.tail = 4.0 * lipschitz * C * std::exp(-lam * w.half_width) / lam;
  w.a = -w.half_width - tau.maxCoeff();
  w.b = w.half_width - tau.minCoeff();
  return w;
}

template <class F>
auto close_integral(F&& f, const SeparatrixOrbit& orb, const Vec& tau, double lipschitz,
                    const MelnikovOptions& opt) {
  const Window w = make_window(orb, tau, lipschitz, opt.tol, opt.window_scale);
  QuadOptions q;
  q.abs_tol = 0.5 * opt.tol;
  q.max_segments = opt.max_segments;
  q.initial_panels = std::max(1, static_cast<int>(std::ceil((w.b - w.a) * orb.lambda_plus())));
  auto r = integrate_gk15(f, w.a, w.b, q);
  MelnikovValue<decltype(r.value)> out{r.value, r.error, w.tail, w.half_width, r.converged};
  return out;
}

// Sup over sampled states near the saddle of the l1 norm of the (p, q)
// gradient of g (max over output components), inflated by 2.
double sampled_scale(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Phase& ph,
                     const std::function<Vec(const Vec&)>& g) {
  const Layout L = cfg.layout();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = 0.05;
  const double window = 60.0 / orb.lambda_plus();
  const double h = 1e-6;
  double best = 0.0;
  for (int k = 0; k < 128; ++k) {
    Vec z = inner_state(cfg, ph, -window + 2.0 * window * unit(rng));
    for (int j = 0; j < L.d; ++j) z[L.angle(j)] = unit(rng);
    for (int i = 0; i < L.n; ++i) {
      z[L.p(i)] = radius * std::max(1.0, orb.lambda(i)) * (2.0 * unit(rng) - 1.0);
      z[L.q(i)] = radius * (2.0 * unit(rng) - 1.0);
    }
    Vec acc;
    for (int c = 0; c < 2 * L.n; ++c) {
      Vec zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      const Vec d = ((g(zp) - g(zm)) / (2.0 * h)).cwiseAbs();
      if (acc.size() == 0) acc = d;
      else acc += d;
    }
    if (acc.size() > 0) best = std::max(best, acc.maxCoeff());
  }
  return 2.0 * best;
}

}  // namespace

Vec inner_state(const SystemConfig& cfg, const Phase& ph, double sigma) {
  const Layout L = cfg.layout();
  Vec z = Vec::Zero(L.size());
  z.segment(L.action(0), L.d) = ph.action;
  z.segment(L.angle(0), L.d) = ph.angle + sigma * cfg.rotator.omega(ph.action);
  z.segment(L.eta(0), L.m) = cfg.clock.advance(ph.eta, sigma);
  return z;
}

Vec orbit_state(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                double sigma) {
  const Layout L = cfg.layout();
  Vec z = inner_state(cfg, ph, sigma);
  const FamilyPoint f = family_point(orb, tau, sigma);
  z.segment(L.p(0), L.n) = f.p;
  z.segment(L.q(0), L.n) = f.dq;
  return z;
}

double melnikov_integrand_vector(const SystemConfig& cfg, const SeparatrixOrbit& orb, int i, const Vec& tau,
                                 double sigma, const Phase& ph) {
  return perturbation_on_energy(cfg, i, orbit_state(cfg, orb, tau, ph, sigma)) -
         perturbation_on_energy(cfg, i, inner_state(cfg, ph, sigma));
}

LipschitzScales lipschitz_scales(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Phase& ph) {
  LipschitzScales s;
  if (cfg.perturbation.lipschitz) {
    s.vector = s.potential = s.potential_phi = *cfg.perturbation.lipschitz;
    return s;
  }
  const Layout L = cfg.layout();
  s.vector = sampled_scale(cfg, orb, ph, [&](const Vec& z) {
    Vec v(L.n);
    for (int i = 0; i < L.n; ++i) v[i] = perturbation_on_energy(cfg, i, z);
    return v;
  });
  if (cfg.perturbation.is_hamiltonian()) {
    const Expression& h = cfg.perturbation.hamiltonian();
    s.potential = sampled_scale(cfg, orb, ph, [&](const Vec& z) { return Vec::Constant(1, h.value(L, z)); });
    s.potential_phi = sampled_scale(cfg, orb, ph, [&](const Vec& z) {
      return Vec(h.gradient(L, z).segment(L.angle(0), L.d));
    });
  }
  return s;
}

VectorValue melnikov_vector(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                            const MelnikovOptions& opt) {
  check_tau(orb, tau);
  check_phase(cfg, ph);
  const int n = orb.count();
  const double L = lipschitz_scales(cfg, orb, ph).vector;
  auto f = [&](double sigma) {
    const Vec zs = orbit_state(cfg, orb, tau, ph, sigma);
    const Vec zi = inner_state(cfg, ph, sigma);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = perturbation_on_energy(cfg, i, zs) - perturbation_on_energy(cfg, i, zi);
    return v;
  };
  return close_integral(f, orb, tau, L, opt);
}

ScalarValue melnikov_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt) {
  check_tau(orb, tau);
  check_phase(cfg, ph);
  const Expression& h = cfg.perturbation.hamiltonian();
  const Layout Lay = cfg.layout();
  const double L = lipschitz_scales(cfg, orb, ph).potential;
  auto f = [&](double sigma) {
    return -(h.value(Lay, orbit_state(cfg, orb, tau, ph, sigma)) - h.value(Lay, inner_state(cfg, ph, sigma)));
  };
  return close_integral(f, orb, tau, L, opt);
}

VectorValue grad_tau_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt) {
  check_tau(orb, tau);
  check_phase(cfg, ph);
  const Expression& h = cfg.perturbation.hamiltonian();
  const Layout Lay = cfg.layout();
  const int n = orb.count();
  double lam_max = 0.0;
  for (int i = 0; i < n; ++i) lam_max = std::max(lam_max, orb.lambda(i));
  // |grad h . x0'| with |x0'| <= max(1, lambda) times the displacement near the saddle.
  const double L = 2.0 * std::max(1.0, lam_max) * lipschitz_scales(cfg, orb, ph).potential;
  auto f = [&](double sigma) {
    const Vec z = orbit_state(cfg, orb, tau, ph, sigma);
    const FamilyPoint fp = family_point(orb, tau, sigma);
    const Vec g = h.gradient(Lay, z);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = -(g[Lay.p(i)] * fp.dp_ds[i] + g[Lay.q(i)] * fp.ddq_ds[i]);
    return v;
  };
  return close_integral(f, orb, tau, L, opt);
}

VectorValue grad_phi_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt) {
  check_tau(orb, tau);
  check_phase(cfg, ph);
  const Expression& h = cfg.perturbation.hamiltonian();
  const Layout Lay = cfg.layout();
  const double L = lipschitz_scales(cfg, orb, ph).potential_phi;
  auto f = [&](double sigma) {
    const Vec gs = h.gradient(Lay, orbit_state(cfg, orb, tau, ph, sigma));
    const Vec gi = h.gradient(Lay, inner_state(cfg, ph, sigma));
    return Vec(-(gs.segment(Lay.angle(0), Lay.d) - gi.segment(Lay.angle(0), Lay.d)));
  };
  return close_integral(f, orb, tau, L, opt);
}

ScalarValue partial_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, int i, double varsigma,
                              const Phase& ph, const MelnikovOptions& opt) {
  check_phase(cfg, ph);
  if (i < 0 || i >= orb.count()) throw std::out_of_range("pendulum index out of range");
  const Expression& h = cfg.perturbation.hamiltonian();
  const Layout Lay = cfg.layout();
  const double L = lipschitz_scales(cfg, orb, ph).potential;
  auto f = [&](double sigma) {
    Vec z = inner_state(cfg, ph, sigma);
    const double base = h.value(Lay, z);
    const OrbitSample x = orb.curve(i).eval(varsigma + sigma);
    z[Lay.p(i)] = x.p;
    z[Lay.q(i)] = x.dq;
    return -(h.value(Lay, z) - base);
  };
  return close_integral(f, orb, Vec::Constant(1, varsigma), L, opt);
}

ScalarValue additivity_gap(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                           const MelnikovOptions& opt) {
  check_tau(orb, tau);
  check_phase(cfg, ph);
  const Expression& h = cfg.perturbation.hamiltonian();
  const Layout Lay = cfg.layout();
  const int n = orb.count();
  const double L = (n + 1) * lipschitz_scales(cfg, orb, ph).potential;
  auto f = [&](double sigma) {
    const Vec zi = inner_state(cfg, ph, sigma);
    const double base = h.value(Lay, zi);
    const FamilyPoint fp = family_point(orb, tau, sigma);
    double v = -(h.value(Lay, orbit_state(cfg, orb, tau, ph, sigma)) - base);
    for (int i = 0; i < n; ++i) {
      Vec z = zi;
      z[Lay.p(i)] = fp.p[i];
      z[Lay.q(i)] = fp.dq[i];
      v += h.value(Lay, z) - base;
    }
    return v;
  };
  ScalarValue r = close_integral(f, orb, tau, L, opt);
  r.value = std::abs(r.value);
  return r;
}

CriticalPoint find_critical_tau(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau_guess,
                                const Phase& ph, const NewtonOptions& opt) {
  check_tau(orb, tau_guess);
  const int n = orb.count();
  auto F = [&](const Vec& tau) { return melnikov_vector(cfg, orb, tau, ph, opt.quad).value; };
  auto jacobian = [&](const Vec& tau) {
    Mat J(n, n);
    for (int j = 0; j < n; ++j) {
      Vec tp = tau, tm = tau;
      tp[j] += opt.jacobian_step;
      tm[j] -= opt.jacobian_step;
      J.col(j) = (F(tp) - F(tm)) / (2.0 * opt.jacobian_step);
    }
    return J;
  };

  CriticalPoint cp;
  cp.context = ph;
  const double target = opt.tol * opt.scale;
  Vec tau = tau_guess;
  Vec f = F(tau);
  cp.residual_history.push_back(f.norm());
  int it = 0;
  while (f.norm() > target) {
    if (it == opt.max_iterations)
      throw NumericError("Newton on the Melnikov vector did not converge in " + std::to_string(it) +
                         " iterations (residual " + std::to_string(f.norm()) + ")");
    ++it;
    const Mat J = jacobian(tau);
    const Vec dx = -J.completeOrthogonalDecomposition().solve(f);
    double t = 1.0;
    Vec tn = tau + dx;
    Vec fn = F(tn);
    while (fn.norm() > (1.0 - 1e-4 * t) * f.norm() && t > 1.0 / 64.0) {
      t *= 0.5;
      tn = tau + t * dx;
      fn = F(tn);
    }
    tau = tn;
    f = fn;
    cp.residual_history.push_back(f.norm());
  }
  cp.tau_star = tau;
  cp.residual_norm = f.norm();
  cp.iterations = it;
  cp.jacobian = jacobian(tau);
  Eigen::JacobiSVD<Mat> svd(cp.jacobian);
  cp.singular_values = svd.singularValues();
  const double smax = cp.singular_values.size() ? cp.singular_values[0] : 0.0;
  cp.rank = 0;
  for (Eigen::Index k = 0; k < cp.singular_values.size(); ++k)
    if (smax > 0.0 && cp.singular_values[k] > 1e-8 * smax) ++cp.rank;
  const double smin = cp.singular_values.size() ? cp.singular_values[cp.singular_values.size() - 1] : 0.0;
  cp.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return cp;
}

CriticalPoint locate_critical_tau(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Phase& ph,
                                  const SeedGrid& grid, NewtonOptions opt) {
  const int n = orb.count();
  const int pts = std::max(1, grid.points);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= pts;
  MelnikovOptions coarse{1e-9, 4000};

  struct Seed {
    Vec tau;
    double norm;
  };
  std::vector<Seed> seeds;
  std::vector<Vec> values;
  double scale = 0.0;
  for (long k = 0; k < total; ++k) {
    Vec tau(n);
    long r = k;
    for (int i = 0; i < n; ++i) {
      tau[i] = grid.lo + (grid.hi - grid.lo) * static_cast<double>(r % pts) / pts;
      r /= pts;
    }
    const Vec v = melnikov_vector(cfg, orb, tau, ph, coarse).value;
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
    seeds.push_back({tau, v.norm()});
    values.push_back(v);
  }
  // In one dimension, sign changes between neighbours give bracketed seeds.
  std::vector<Seed> bracketed;
  if (n == 1) {
    for (long k = 0; k + 1 < total; ++k) {
      const double a = values[k][0], b = values[k + 1][0];
      if (a * b < 0.0) {
        const double t = seeds[k].tau[0] + (seeds[k + 1].tau[0] - seeds[k].tau[0]) * a / (a - b);
        bracketed.push_back({Vec::Constant(1, t), std::min(std::abs(a), std::abs(b))});
      }
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.norm < y.norm; });
  std::sort(bracketed.begin(), bracketed.end(), [](const Seed& x, const Seed& y) { return x.norm < y.norm; });
  bracketed.insert(bracketed.end(), seeds.begin(), seeds.end());

  opt.scale = scale > 0.0 ? scale : 1.0;
  std::string last_error = "no seeds";
  const std::size_t tries = std::min<std::size_t>(bracketed.size(), 6);
  for (std::size_t k = 0; k < tries; ++k) {
    try {
      return find_critical_tau(cfg, orb, bracketed[k].tau, ph, opt);
    } catch (const NumericError& e) {
      last_error = e.what();
    }
  }
  throw NumericError("no critical point found from the seed grid: " + last_error);
}

ReducedBranch::ReducedBranch(const SystemConfig& cfg, const SeparatrixOrbit& orb, Vec tau_seed, ReducedOptions opt)
    : cfg_(cfg), orb_(orb), tau_(std::move(tau_seed)), opt_(std::move(opt)) {}

CriticalPoint ReducedBranch::solve(const Vec& action, const Vec& theta, const Vec& guess) const {
  return find_critical_tau(cfg_, orb_, guess, Phase{action, theta, cfg_.clock.eta0()}, opt_.newton);
}

ReducedSample ReducedBranch::sample(const Vec& action, const Vec& theta) {
  const Phase ph{action, theta, cfg_.clock.eta0()};
  const CriticalPoint cp = solve(action, theta, tau_);
  if (!cp.nondegenerate())
    throw DegenerateError("critical point is degenerate (rank " + std::to_string(cp.rank) + " < " +
                          std::to_string(cp.tau_star.size()) + "): no isolated zero of the Melnikov vector");
  const MelnikovOptions& q = opt_.newton.quad;
  ReducedSample s;
  s.action = action;
  s.theta = theta;
  s.tau_star = cp.tau_star;
  s.value = melnikov_potential(cfg_, orb_, cp.tau_star, ph, q).value;

  auto probe = [&](const Vec& I, const Vec& th) {
    const CriticalPoint c = solve(I, th, cp.tau_star);
    if ((c.tau_star - cp.tau_star).cwiseAbs().maxCoeff() > opt_.branch_jump)
      throw NumericError("branch loss: critical point jumped while differentiating the reduced potential");
    return melnikov_potential(cfg_, orb_, c.tau_star, Phase{I, th, cfg_.clock.eta0()}, q).value;
  };
  const int d = static_cast<int>(theta.size());
  const double h = opt_.step;
  s.dtheta = Vec(d);
  s.dI = Vec(d);
  for (int j = 0; j < d; ++j) {
    Vec tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    s.dtheta[j] = (probe(action, tp) - probe(action, tm)) / (2.0 * h);
    Vec ip = action, im = action;
    ip[j] += h;
    im[j] -= h;
    s.dI[j] = (probe(ip, theta) - probe(im, theta)) / (2.0 * h);
  }
  s.dtheta_envelope = grad_phi_potential(cfg_, orb_, cp.tau_star, ph, q).value;
  const double gap = (s.dtheta_envelope - s.dtheta).cwiseAbs().maxCoeff();
  if (gap > opt_.envelope_tol * std::max(1.0, s.dtheta.cwiseAbs().maxCoeff()))
    throw NumericError("branch loss: envelope derivative disagrees with re-solved derivative by " +
                       std::to_string(gap));
  tau_ = cp.tau_star;
  return s;
}

ReducedSample reduced_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& action,
                                const Vec& theta, const std::optional<Vec>& tau_guess, const ReducedOptions& opt) {
  Vec seed;
  if (tau_guess) {
    seed = *tau_guess;
  } else {
    const CriticalPoint cp = locate_critical_tau(cfg, orb, Phase{action, theta, cfg.clock.eta0()}, {}, opt.newton);
    if (!cp.nondegenerate())
      throw DegenerateError("critical point is degenerate: no isolated zero of the Melnikov vector");
    seed = cp.tau_star;
  }
  ReducedBranch branch(cfg, orb, seed, opt);
  return branch.sample(action, theta);
}

}  // namespace melnikov
