// Acceptance suite. Prints one PASS/FAIL line per criterion; "--only A5"
// runs a single criterion. Exit status is nonzero when any selected
// criterion fails.

#include "melnikov/melnikov.hpp"
#include "melnikov/separatrix.hpp"
#include "melnikov/verify.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace melnikov;
using namespace fx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* name;
  double time_limit;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Phase phase(double I, double phi, double t) {
  return {Vec::Constant(1, I), Vec::Constant(1, phi), Vec::Constant(1, t)};
}
Vec v1(double x) { return Vec::Constant(1, x); }

Outcome a1() {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  double worst = 0.0;
  bool ok = true;
  for (double tau : {-1.0, -0.5, 0.0, 0.5, 1.0})
    for (double phi : {0.0, 0.2, 0.4, 0.6, 0.8})
      for (double I : {0.0, 0.4, 1.0}) {
        const Phase ph = phase(I, phi, 0.15);
        const double mv = melnikov_vector(cfg, orb, v1(tau), ph).value[0];
        const double dt = grad_tau_potential(cfg, orb, v1(tau), ph).value[0];
        const double m = melnikov_potential(cfg, orb, v1(tau), ph).value;
        const double ratio = std::abs(mv - dt) / (2e-8 * (1 + std::abs(m)));
        worst = std::max(worst, ratio);
        ok = ok && ratio <= 1.0;
      }
  return {ok, fmt("max |Mv - dtau M| / (2e-8 (1 + |M|)) = %.3g over 75 points", worst)};
}

Outcome a2() {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_plain = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double tau = 4 * u(rng) - 2, I = 1.5 * u(rng), phi = u(rng), t = u(rng);
    const double q = melnikov_potential(cfg, orb, v1(tau), phase(I, phi, t)).value;
    const double exact = oracle::ref_potential(tau, I, phi, t);
    worst = std::max(worst, std::abs(q - exact) / std::max(std::abs(exact), 0.01));
    worst_plain = std::max(worst_plain, std::abs(q - exact) / std::abs(exact));
  }
  return {worst <= 1e-8, fmt("max relative error %.3g (floor 0.01; unfloored %.3g) at 20 random points", worst,
                             worst_plain)};
}

Outcome a3() {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const double I = 0.2;
  double shift = 0.0, tau_law = 0.0, invariance = 0.0;
  for (double phi : {0.0, 0.25, 0.5, 0.75})
    for (double t : {0.0, 0.3, 0.6}) {
      for (double c : {0.3, 1.7}) {
        const double a = melnikov_potential(cfg, orb, v1(0.2), phase(I, phi, t)).value;
        const double b = melnikov_potential(cfg, orb, v1(0.2 + c), phase(I, phi + c * I, t + c)).value;
        shift = std::max(shift, std::abs(a - b));
      }
      const CriticalPoint cp = locate_critical_tau(cfg, orb, phase(I, phi, t));
      const double theta = phi - t * I;
      const CriticalPoint red = find_critical_tau(cfg, orb, (cp.tau_star.array() - t).matrix(), phase(I, theta, 0.0));
      tau_law = std::max(tau_law, std::abs(red.tau_star[0] - (cp.tau_star[0] - t)));
      const double mstar = melnikov_potential(cfg, orb, cp.tau_star, phase(I, phi, t)).value;
      const ReducedSample s = reduced_potential(cfg, orb, v1(I), v1(theta), red.tau_star);
      invariance = std::max(invariance, std::abs(mstar - s.value));
    }
  const bool ok = shift <= 1e-8 && tau_law <= 1e-8 && invariance <= 1e-8;
  return {ok, fmt("potential shift %.2g, tau* shift law %.2g, reduced invariance %.2g on a 4x3 grid", shift, tau_law,
                  invariance)};
}

Outcome a4() {
  const std::vector<double> eps{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const Phase ph = phase(0.2, 0.1, 0.3);
  const SystemConfig ham = reference();
  const SeparatrixOrbit orb = build_separatrix(ham.penduli);
  const SplittingReport h = measure_splitting(ham, orb, v1(0.1), ph, eps);
  const SystemConfig dis = dissipative(0.5);
  const SplittingReport d = measure_splitting(dis, orb, v1(0.1), ph, eps);
  const double sh = h.fit ? h.fit->slope : 0.0, sd = d.fit ? d.fit->slope : 0.0;
  return {sh >= 1.7 && sd >= 1.5, fmt("Hamiltonian slope %.3f +- %.2f (>= 1.7), dissipative slope %.3f +- %.2f (>= 1.5)",
                                      sh, h.fit ? h.fit->slope_stderr : 0.0, sd, d.fit ? d.fit->slope_stderr : 0.0)};
}

Outcome a5() {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const CriticalPoint cp = locate_critical_tau(cfg, orb, phase(0.2, 0.1, 0.3));
  const std::vector<double> eps{4e-3, 2e-3, 1e-3, 5e-4};
  const JumpReport rep = measure_jump(cfg, orb, cp, eps);
  const double d = rep.dtheta[0];
  // The criterion is evaluated with the stated prediction -eps d_theta M*.
  std::vector<double> res;
  double rel = 0.0, rel_plus = 0.0;
  for (const JumpRow& row : rep.rows) {
    const double stated = -row.eps * d;
    res.push_back(std::abs(row.measured[0] - stated));
    if (row.eps == 1e-3) {
      rel = std::abs(row.measured[0] - stated) / std::abs(row.eps * d);
      rel_plus = std::abs(row.measured[0] - row.eps * d) / std::abs(row.eps * d);
    }
  }
  const OrderFit fit = fit_order(eps, res);
  const bool ok = rel <= 0.05 && fit.slope >= 1.7;
  return {ok, fmt("eps=1e-3: relative error %.3g (<= 0.05), sweep slope %.3f (>= 1.7); d_theta M* = %.6g; "
                  "with prediction +eps d_theta M*: relative error %.3g, slope %.3f",
                  rel, fit.slope, d, rel_plus, rep.fit ? rep.fit->slope : 0.0)};
}

Outcome a6() {
  const SystemConfig cpl = two_penduli(true);
  const SystemConfig add = two_penduli(false);
  const SeparatrixOrbit orb = build_separatrix(cpl.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);
  const double lp = orb.lambda_plus();
  const MelnikovOptions mo;
  std::vector<double> gaps, noise;
  double scale = 0.0;
  for (double D : {2.0, 4.0, 6.0, 8.0, 10.0, 15.0}) {
    Vec tau(2);
    tau << -D / (2 * lp), D / (2 * lp);
    const ScalarValue g = additivity_gap(cpl, orb, tau, ph, mo);
    gaps.push_back(g.value);
    noise.push_back(g.quad_error + g.tail_bound);
    scale = std::max(scale, std::abs(melnikov_potential(cpl, orb, tau, ph, mo).value));
  }
  bool mono = true;
  for (std::size_t k = 0; k + 2 < gaps.size(); ++k) mono = mono && gaps[k + 1] <= gaps[k] + 2 * (noise[k] + noise[k + 1]);
  const bool far = gaps.back() <= 1e-5 * scale;
  double worst_add = 0.0;
  for (double D : {0.0, 1.0, 3.0, 7.0}) {
    Vec tau(2);
    tau << -D / 2, 0.3 + D / 2;
    worst_add = std::max(worst_add, additivity_gap(add, orb, tau, ph, mo).value);
  }
  const bool ok = mono && far && worst_add <= mo.tol;
  return {ok, fmt("coupled gaps %.2e %.2e %.2e %.2e %.2e (monotone: %s), gap at 15/lambda %.2e (<= %.2e), "
                  "additive max gap %.2e (<= %.0e)",
                  gaps[0], gaps[1], gaps[2], gaps[3], gaps[4], mono ? "yes" : "no", gaps[5], 1e-5 * scale, worst_add,
                  mo.tol)};
}

Outcome a7() {
  const SystemConfig cfg = reference();
  const SeparatrixOrbit orb = build_separatrix(cfg.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);
  const CriticalPoint located = locate_critical_tau(cfg, orb, ph);
  // restart away from the root so the history has enough iterates above the noise floor
  const CriticalPoint cp = find_critical_tau(cfg, orb, located.tau_star + v1(0.1), ph);
  if ((cp.tau_star - located.tau_star).norm() > 1e-10) return {false, "restart converged to a different root"};
  const auto& r = cp.residual_history;
  // convergence order from consecutive residual triples above the noise floor
  double order = 0.0;
  int triples = 0;
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    if (r[k + 1] < 1e-13) break;
    order = std::log(r[k + 1] / r[k]) / std::log(r[k] / r[k - 1]);
    ++triples;
  }
  std::string hist;
  for (double x : r) hist += fmt(" %.2e", x);
  const bool ok = triples > 0 && order >= 1.8 && cp.rank == 1 && cp.condition < 1e6;
  return {ok, fmt("residuals%s, order %.2f, rank %d, condition %.3g", hist.c_str(), order, cp.rank, cp.condition)};
}

Outcome a8() {
  const SystemConfig ref = reference();
  const SeparatrixOrbit orb = build_separatrix(ref.penduli);
  const Phase ph = phase(0.2, 0.1, 0.3);
  const std::vector<SystemConfig> trivial{
      with_h(ref, Expression::zero()),
      with_h(ref, Expression({Term{1.0, {c(Phi()), Factor::power(I(), 1)}}, Term{0.5, {c(Eta())}}}))};
  double worst = 0.0;
  for (const SystemConfig& cfg : trivial) {
    for (double tau : {-0.5, 0.1, 0.8}) {
      worst = std::max(worst, std::abs(melnikov_vector(cfg, orb, v1(tau), ph).value[0]));
      worst = std::max(worst, std::abs(melnikov_potential(cfg, orb, v1(tau), ph).value));
    }
    const SplittingReport s = measure_splitting(cfg, orb, v1(0.1), ph, {1e-2, 1e-3});
    for (const SplittingRow& row : s.rows) worst = std::max(worst, std::abs(row.measured[0]));
    CriticalPoint cp;
    cp.tau_star = v1(0.1);
    cp.jacobian = Mat::Identity(1, 1);
    cp.rank = 1;
    cp.context = ph;
    const JumpRow j = action_jump(cfg, orb, cp, 1e-2, Vec::Zero(1));
    worst = std::max(worst, std::abs(j.measured[0]));
  }
  double eps0 = 0.0;
  for (double tau : {-0.5, 0.1, 0.8}) {
    eps0 = std::max(eps0, stable_graph_value(ref, orb, v1(tau), ph, 0.0).P.lpNorm<Eigen::Infinity>());
    eps0 = std::max(eps0, unstable_graph_value(ref, orb, v1(tau), ph, 0.0).P.lpNorm<Eigen::Infinity>());
  }
  const bool ok = worst <= 1e-12 && eps0 == 0.0;
  return {ok, fmt("max trivial vector/potential/splitting/jump %.2g (<= 1e-12), eps=0 graph values %.2g", worst, eps0)};
}

Outcome a9() {
  const SystemConfig ref = reference();
  const SystemConfig cpl = two_penduli(true);
  const SeparatrixOrbit orb1 = build_separatrix(ref.penduli);
  const SeparatrixOrbit orb2 = build_separatrix(cpl.penduli);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MelnikovOptions base, wide;
  wide.window_scale = 2.0;
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Phase ph = phase(1.2 * u(rng), u(rng), u(rng));
    const double tau = 4 * u(rng) - 2;
    auto check = [&](double a, double b, double tail) {
      worst = std::max(worst, std::abs(a - b) / tail);
      if (!(std::abs(a - b) < tail)) ++violations;
    };
    switch (k % 5) {
      case 0: {
        const ScalarValue a = melnikov_potential(ref, orb1, v1(tau), ph, base);
        check(a.value, melnikov_potential(ref, orb1, v1(tau), ph, wide).value, a.tail_bound);
        break;
      }
      case 1: {
        const VectorValue a = melnikov_vector(ref, orb1, v1(tau), ph, base);
        check(a.value[0], melnikov_vector(ref, orb1, v1(tau), ph, wide).value[0], a.tail_bound);
        break;
      }
      case 2: {
        const VectorValue a = grad_phi_potential(ref, orb1, v1(tau), ph, base);
        check(a.value[0], grad_phi_potential(ref, orb1, v1(tau), ph, wide).value[0], a.tail_bound);
        break;
      }
      case 3: {
        Vec t2(2);
        t2 << tau, -0.5 * tau;
        const VectorValue a = melnikov_vector(cpl, orb2, t2, ph, base);
        const VectorValue b = melnikov_vector(cpl, orb2, t2, ph, wide);
        check(a.value[0], b.value[0], a.tail_bound);
        check(a.value[1], b.value[1], a.tail_bound);
        break;
      }
      default: {
        const ScalarValue a = partial_potential(cpl, orb2, 1, tau, ph, base);
        check(a.value, partial_potential(cpl, orb2, 1, tau, ph, wide).value, a.tail_bound);
        break;
      }
    }
  }
  return {violations == 0, fmt("%d violations over 50 evaluations, max |change| / tail_bound = %.3g", violations, worst)};
}

Outcome a10() {
  const double nu1 = 1.0, nu2 = 1.618033988749895, a1 = 0.15, a2 = 0.4, t0 = 0.3;
  SystemConfig aff = reference();
  aff.perturbation.field = HamiltonianField{Expression(
      {Term{1.0, {c(Q()), Factor::cos({{Eta(), nu1}}, a1)}}, Term{1.0, {c(Q()), Factor::cos({{Eta(), nu2}}, a2)}}})};
  aff.finalize();
  SystemConfig qp = reference();
  qp.clock = ClockDriver::quasiperiodic((Vec(2) << nu1, nu2).finished(), Vec::Zero(2));
  qp.perturbation.field = HamiltonianField{Expression({Term{1.0, {c(Q()), c(Eta(0))}}, Term{1.0, {c(Q()), c(Eta(1))}}})};
  qp.finalize();
  const SeparatrixOrbit orb = build_separatrix(aff.penduli);
  double worst = 0.0;
  for (double tau : {-1.0, -0.2, 0.3, 0.9})
    for (double I : {0.0, 0.5}) {
      const Phase pa{v1(I), v1(0.2), v1(t0)};
      const Phase pq{v1(I), v1(0.2), (Vec(2) << nu1 * t0 + a1, nu2 * t0 + a2).finished()};
      const double x = melnikov_vector(aff, orb, v1(tau), pa).value[0];
      const double y = melnikov_vector(qp, orb, v1(tau), pq).value[0];
      worst = std::max(worst, std::abs(x - y));
    }
  return {worst <= 1e-10, fmt("max |Mv(affine) - Mv(quasiperiodic)| = %.3g over 8 points", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"A1", "gradient identity", 10.0, a1},      {"A2", "closed-form oracle", 5.0, a2},
      {"A3", "shift and invariance", 10.0, a3},   {"A4", "splitting order", 60.0, a4},
      {"A5", "action jump", 60.0, a5},            {"A6", "additivity", 20.0, a6},
      {"A7", "H3 certificate", 5.0, a7},          {"A8", "trivial suite", 10.0, a8},
      {"A9", "quadrature honesty", 20.0, a9},     {"A10", "clock-driver generality", 5.0, a10}};
  std::string only;
  for (int k = 1; k + 1 < argc; ++k)
    if (std::string(argv[k]) == "--only") only = argv[k + 1];

  int failures = 0, ran = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && only != c.id) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%-3s %s  %s: %s [%.2f s of %.0f s]\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.time_limit);
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
