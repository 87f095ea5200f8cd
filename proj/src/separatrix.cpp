#include "melnikov/separatrix.hpp"

#include "melnikov/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace melnikov {

SaddleData saddle_data(const PenduliSpec& spec) {
  SaddleData d;
  d.lambda = Vec(spec.count());
  for (int i = 0; i < spec.count(); ++i) {
    const double v2 = spec.potentials[i].d2(0.0);
    if (!(v2 < 0.0)) throw ConfigError("saddle at q = 0 is degenerate", "penduli/" + std::to_string(i));
    d.lambda[i] = std::sqrt(-v2);
  }
  d.lambda_plus = d.lambda.minCoeff();
  return d;
}

PendulumSeparatrix PendulumSeparatrix::closed_form(double amplitude, int branch) {
  PendulumSeparatrix c;
  c.closed_ = true;
  c.amplitude_ = amplitude;
  c.lambda_ = kTwoPi * std::sqrt(amplitude);
  c.sign_ = 1;
  c.branch_ = branch;
  c.apex_p_ = branch * c.lambda_ / std::numbers::pi;
  c.apex_q_ = 0.5;
  return c;
}

namespace {

struct HalfRun {
  std::vector<double> t;
  std::vector<Eigen::Vector2d> y;
  // Extrema of p along the run, refined to pdot = 0.
  std::vector<double> event_t;
  std::vector<Eigen::Vector2d> event_y;
};

// Integrates one half of the loop from a point near the saddle at the origin
// (in local coordinates) until the orbit reaches the neighbourhood of the far
// saddle copy at `target`. Samples are spaced by `step` in internal time.
HalfRun run_half(const TrigPotential& V, int sign, double lambda, const Eigen::Vector2d& y0, double dir,
                 double target, const SeparatrixOptions& opt) {
  auto rhs = [&](double, const Vec& y) {
    Vec f(2);
    f << -sign * V.d1(y[1]), sign * y[0];
    return f;
  };
  OdeOptions ode;
  ode.abs_tol = opt.abs_tol;
  ode.rel_tol = opt.rel_tol;
  const double step = opt.table_step / lambda;
  ode.initial_step = step;

  HalfRun run;
  run.t.push_back(0.0);
  run.y.push_back(y0);
  double pmax = std::abs(y0[0]);
  double best = -1.0;

  auto pdot = [&](const Eigen::Vector2d& y) { return -sign * V.d1(y[1]); };

  for (long j = 1;; ++j) {
    const double t_prev = run.t.back();
    const double t_next = dir * static_cast<double>(j) * step;
    if (std::abs(t_next) * lambda > opt.time_budget)
      throw NumericError("no homoclinic return within the time budget");
    Vec y = run.y.back();
    y = integrate_dop853(rhs, t_prev, y, t_next, ode).y;
    const Eigen::Vector2d yn(y[0], y[1]);
    const Eigen::Vector2d yp = run.y.back();
    run.t.push_back(t_next);
    run.y.push_back(yn);
    pmax = std::max(pmax, std::abs(yn[0]));

    // Extremum of p between the last two samples: refine pdot = 0 by Newton
    // with re-integration from the left sample.
    if (pdot(yp) * pdot(yn) < 0.0) {
      const double f0 = pdot(yp), f1 = pdot(yn);
      double u = (t_next - t_prev) * f0 / (f0 - f1);
      Vec z(2);
      for (int it = 0; it < 8; ++it) {
        Vec start(2);
        start << yp[0], yp[1];
        z = integrate_dop853(rhs, t_prev, start, t_prev + u, ode).y;
        const double F = -sign * V.d1(z[1]);
        const double dF = -V.d2(z[1]) * z[0];
        if (dF == 0.0) break;
        const double du = F / dF;
        u -= du;
        if (std::abs(du) < 1e-15 * std::max(1.0, std::abs(t_prev))) break;
      }
      Vec start(2);
      start << yp[0], yp[1];
      z = integrate_dop853(rhs, t_prev, start, t_prev + u, ode).y;
      best = std::max(best, std::abs(z[0]));
      run.event_t.push_back(t_prev + u);
      run.event_y.emplace_back(z[0], z[1]);
    }

    if (best > 0.0 && std::abs(yn[0]) < 1e-3 * pmax) {
      if (std::abs(yn[1] - target) > 1e-2)
        throw NumericError("orbit stalls away from the saddle copy: the loop is not homoclinic");
      break;
    }
    if (yn[0] * y0[0] < 0.0) throw NumericError("momentum changes sign along the loop");
  }
  if (best < 0.0) throw NumericError("separatrix has no apex");
  return run;
}

}  // namespace

PendulumSeparatrix PendulumSeparatrix::numeric(const TrigPotential& V, int sign, int branch,
                                               const SeparatrixOptions& opt) {
  PendulumSeparatrix c;
  c.closed_ = false;
  c.sign_ = sign;
  c.branch_ = branch;
  c.lambda_ = std::sqrt(-V.d2(0.0));
  const double lam = c.lambda_;
  const double a = opt.start_offset / std::sqrt(1.0 + lam * lam);
  const int k = sign * branch;

  // Unstable eigendirection p = sign * lambda * q, stable p = -sign * lambda * q.
  const HalfRun fwd = run_half(V, sign, lam, {branch * lam * a, sign * branch * a}, 1.0, k, opt);
  const HalfRun bwd = run_half(V, sign, lam, {branch * lam * a, -sign * branch * a}, -1.0, -k, opt);

  // Apex: the first maximal |p| met from the unstable side; the stable side
  // must reach the same point.
  std::size_t fa = 0;
  for (std::size_t e = 1; e < fwd.event_t.size(); ++e)
    if (std::abs(fwd.event_y[e][0]) > std::abs(fwd.event_y[fa][0]) * (1.0 + 1e-12)) fa = e;
  const Eigen::Vector2d apex = fwd.event_y[fa];
  std::size_t ba = 0;
  auto gap = [&](const Eigen::Vector2d& y) { return std::abs(y[0] - apex[0]) + circle_dist(y[1], apex[1]); };
  for (std::size_t e = 1; e < bwd.event_t.size(); ++e)
    if (gap(bwd.event_y[e]) < gap(bwd.event_y[ba])) ba = e;
  const double fwd_apex_t = fwd.event_t[fa];
  const double bwd_apex_t = bwd.event_t[ba];

  c.apex_p_ = apex[0];
  c.apex_q_ = mod1(apex[1]);
  c.apex_mismatch_ = gap(bwd.event_y[ba]);
  if (c.apex_mismatch_ > 1e-6)
    throw NumericError("unstable and stable branches do not meet at the apex (mismatch " +
                       std::to_string(c.apex_mismatch_) + ")");

  auto node = [&](double t, const Eigen::Vector2d& y, double t0) {
    OrbitSample x;
    x.p = y[0];
    x.dq = y[1];
    x.dp_ds = -sign * V.d1(y[1]);
    x.ddq_ds = sign * y[0];
    return Node{t - t0, x};
  };
  for (std::size_t j = 0; j < fwd.t.size(); ++j) {
    c.neg_.push_back(node(fwd.t[j], fwd.y[j], fwd_apex_t));
    if (c.neg_.back().s > 0.0) break;
  }
  for (std::size_t j = 0; j < bwd.t.size(); ++j) {
    c.pos_.push_back(node(bwd.t[j], bwd.y[j], bwd_apex_t));
    if (c.pos_.back().s < 0.0) break;
  }
  std::reverse(c.pos_.begin(), c.pos_.end());
  return c;
}

OrbitSample PendulumSeparatrix::hermite(const std::vector<Node>& t, double s) {
  const double s0 = t.front().s;
  const double h = t[1].s - t[0].s;
  auto k = static_cast<std::ptrdiff_t>(std::floor((s - s0) / h));
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(t.size()) - 2);
  const Node& A = t[k];
  const Node& B = t[k + 1];
  const double hh = B.s - A.s;
  const double u = (s - A.s) / hh;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  // Derivatives of the basis with respect to s.
  const double d00 = 6 * u * (u - 1) / hh;
  const double d10 = (1 - u) * (1 - 3 * u) / hh;
  const double d01 = -d00;
  const double d11 = u * (3 * u - 2) / hh;
  OrbitSample x;
  x.p = h00 * A.x.p + h10 * hh * A.x.dp_ds + h01 * B.x.p + h11 * hh * B.x.dp_ds;
  x.dq = h00 * A.x.dq + h10 * hh * A.x.ddq_ds + h01 * B.x.dq + h11 * hh * B.x.ddq_ds;
  x.dp_ds = d00 * A.x.p + d10 * hh * A.x.dp_ds + d01 * B.x.p + d11 * hh * B.x.dp_ds;
  x.ddq_ds = d00 * A.x.dq + d10 * hh * A.x.ddq_ds + d01 * B.x.dq + d11 * hh * B.x.ddq_ds;
  return x;
}

OrbitSample PendulumSeparatrix::eval(double s) const {
  OrbitSample x;
  if (closed_) {
    const double z = lambda_ * s;
    const double e = std::exp(-std::abs(z));
    const double sech = 2.0 * e / (1.0 + e * e);
    const double tanh = std::tanh(z);
    const double pi = std::numbers::pi;
    x.p = branch_ * lambda_ / pi * sech;
    x.dq = z <= 0.0 ? branch_ * (2.0 / pi) * std::atan(std::exp(z)) : -branch_ * (2.0 / pi) * std::atan(e);
    x.dp_ds = -branch_ * lambda_ * lambda_ / pi * sech * tanh;
    x.ddq_ds = x.p;
    return x;
  }
  if (s < neg_.front().s) {
    const double g = std::exp(lambda_ * (s - neg_.front().s));
    x.p = neg_.front().x.p * g;
    x.dq = neg_.front().x.dq * g;
    x.dp_ds = lambda_ * x.p;
    x.ddq_ds = lambda_ * x.dq;
    return x;
  }
  if (s > pos_.back().s) {
    const double g = std::exp(-lambda_ * (s - pos_.back().s));
    x.p = pos_.back().x.p * g;
    x.dq = pos_.back().x.dq * g;
    x.dp_ds = -lambda_ * x.p;
    x.ddq_ds = -lambda_ * x.dq;
    return x;
  }
  return hermite(s <= 0.0 ? neg_ : pos_, s);
}

SeparatrixOrbit::SeparatrixOrbit(std::vector<PendulumSeparatrix> curves, double half_width)
    : curves_(std::move(curves)), half_width_(half_width) {
  if (curves_.empty()) throw ConfigError("no penduli");
  lambda_plus_ = curves_.front().lambda();
  for (const auto& c : curves_) lambda_plus_ = std::min(lambda_plus_, c.lambda());
  decay_constant_ = 0.0;
  for (const auto& c : curves_) {
    const double smax = half_width_ / c.lambda();
    const double ds = 0.01 / c.lambda();
    for (double s = -smax; s <= smax; s += ds) {
      const OrbitSample x = c.eval(s);
      const double m = std::max(std::abs(x.p), std::abs(x.dq));
      decay_constant_ = std::max(decay_constant_, std::exp(lambda_plus_ * std::abs(s)) * m);
    }
  }
}

SeparatrixOrbit build_separatrix(const PenduliSpec& spec, const SeparatrixOptions& opt) {
  spec.validate();
  std::vector<PendulumSeparatrix> curves;
  for (int i = 0; i < spec.count(); ++i) {
    const auto amp = spec.potentials[i].pure_cosine_amplitude();
    if (amp && spec.signs[i] == 1 && !opt.force_numeric)
      curves.push_back(PendulumSeparatrix::closed_form(*amp, spec.branches[i]));
    else
      curves.push_back(PendulumSeparatrix::numeric(spec.potentials[i], spec.signs[i], spec.branches[i], opt));
  }
  return SeparatrixOrbit(std::move(curves), opt.half_width);
}

FamilyPoint family_point(const SeparatrixOrbit& orb, const Vec& tau, double sigma) {
  const int n = orb.count();
  if (tau.size() != n) throw std::invalid_argument("tau has the wrong dimension");
  FamilyPoint f{Vec(n), Vec(n), Vec(n), Vec(n), Vec(n)};
  for (int i = 0; i < n; ++i) {
    const OrbitSample x = orb.curve(i).eval(tau[i] + sigma);
    f.p[i] = x.p;
    f.dq[i] = x.dq;
    f.q[i] = x.q();
    f.dp_ds[i] = x.dp_ds;
    f.ddq_ds[i] = x.ddq_ds;
  }
  return f;
}

double tail_bound(const SeparatrixOrbit& orb, double sigma) {
  return 2.0 * orb.decay_constant() * std::exp(-orb.lambda_plus() * std::abs(sigma));
}

void write_separatrix_csv(std::ostream& os, const SeparatrixOrbit& orb, double s_max, double step) {
  os << "s";
  for (int i = 0; i < orb.count(); ++i) os << ",p" << i + 1 << ",q" << i + 1;
  os << '\n';
  const long steps = static_cast<long>(std::floor(2.0 * s_max / step + 0.5));
  char buf[64];
  for (long j = 0; j <= steps; ++j) {
    const double s = -s_max + j * step;
    std::snprintf(buf, sizeof buf, "%.10g", s);
    os << buf;
    for (int i = 0; i < orb.count(); ++i) {
      const OrbitSample x = orb.curve(i).eval(s);
      std::snprintf(buf, sizeof buf, ",%.17g", x.p);
      os << buf;
      std::snprintf(buf, sizeof buf, ",%.17g", x.q());
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace melnikov
