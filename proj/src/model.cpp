#include "melnikov/model.hpp"

#include <algorithm>
#include <cmath>

namespace melnikov {

TrigPotential::TrigPotential(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {}

double TrigPotential::value(double q) const {
  double v = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) v += a_[k] * (std::cos(kTwoPi * (k + 1) * q) - 1.0);
  for (std::size_t k = 0; k < b_.size(); ++k) v += b_[k] * std::sin(kTwoPi * (k + 1) * q);
  return v;
}

double TrigPotential::d1(double q) const {
  double v = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double w = kTwoPi * (k + 1);
    v -= a_[k] * w * std::sin(w * q);
  }
  for (std::size_t k = 0; k < b_.size(); ++k) {
    const double w = kTwoPi * (k + 1);
    v += b_[k] * w * std::cos(w * q);
  }
  return v;
}

double TrigPotential::d2(double q) const {
  double v = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double w = kTwoPi * (k + 1);
    v -= a_[k] * w * w * std::cos(w * q);
  }
  for (std::size_t k = 0; k < b_.size(); ++k) {
    const double w = kTwoPi * (k + 1);
    v -= b_[k] * w * w * std::sin(w * q);
  }
  return v;
}

std::optional<double> TrigPotential::pure_cosine_amplitude() const {
  if (a_.empty() || a_[0] <= 0.0) return std::nullopt;
  for (std::size_t k = 1; k < a_.size(); ++k)
    if (a_[k] != 0.0) return std::nullopt;
  for (double b : b_)
    if (b != 0.0) return std::nullopt;
  return a_[0];
}

PenduliSpec::PenduliSpec(std::vector<TrigPotential> pots, std::vector<int> sgns, std::vector<int> brs)
    : potentials(std::move(pots)), signs(std::move(sgns)), branches(std::move(brs)) {
  if (branches.empty()) branches.assign(potentials.size(), 1);
}

void PenduliSpec::validate() const {
  if (potentials.empty()) throw ConfigError("at least one pendulum is required", "penduli");
  if (signs.size() != potentials.size()) throw ConfigError("one sign per pendulum is required", "penduli");
  if (branches.size() != potentials.size()) throw ConfigError("one branch per pendulum is required", "penduli");
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    const std::string at = "penduli/" + std::to_string(i);
    const TrigPotential& V = potentials[i];
    if (signs[i] != 1 && signs[i] != -1) throw ConfigError("sign must be +1 or -1", at + "/sign");
    if (branches[i] != 1 && branches[i] != -1) throw ConfigError("branch must be +1 or -1", at + "/branch");
    double scale = 0.0;
    for (double a : V.cos_coeffs()) scale = std::max(scale, std::abs(a));
    for (double b : V.sin_coeffs()) scale = std::max(scale, std::abs(b));
    if (scale == 0.0) throw ConfigError("potential is identically zero", at + "/potential");
    const double order = static_cast<double>(std::max(V.cos_coeffs().size(), V.sin_coeffs().size()));
    if (std::abs(V.d1(0.0)) > 1e-12 * scale * kTwoPi * order)
      throw ConfigError("V'(0) must vanish (saddle at q = 0)", at + "/potential");
    if (!(V.d2(0.0) < 0.0)) throw ConfigError("V''(0) must be negative (non-degenerate maximum)", at + "/potential");
    for (int k = 0; k < 16; ++k) {
      const double q = -0.9 + 0.117 * k;
      if (std::abs(V.value(q + 1.0) - V.value(q)) > 1e-12 * std::max(1.0, scale * order))
        throw ConfigError("potential is not 1-periodic", at + "/potential");
    }
  }
}

Polynomial::Polynomial(int dim, std::vector<Monomial> monomials) : dim_(dim), monomials_(std::move(monomials)) {
  for (const Monomial& m : monomials_) {
    if (static_cast<int>(m.powers.size()) != dim_) throw ConfigError("monomial exponent count differs from dimension");
    for (int e : m.powers)
      if (e < 0) throw ConfigError("negative exponent in polynomial");
  }
}

Polynomial Polynomial::half_square(int dim) {
  std::vector<Monomial> ms;
  for (int j = 0; j < dim; ++j) {
    Monomial m{0.5, std::vector<int>(dim, 0)};
    m.powers[j] = 2;
    ms.push_back(std::move(m));
  }
  return Polynomial(dim, std::move(ms));
}

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

}  // namespace

double Polynomial::value(const Vec& x) const {
  double s = 0.0;
  for (const Monomial& m : monomials_) {
    double t = m.coeff;
    for (int j = 0; j < dim_; ++j) t *= ipow(x[j], m.powers[j]);
    s += t;
  }
  return s;
}

Vec Polynomial::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim_);
  for (const Monomial& m : monomials_) {
    for (int j = 0; j < dim_; ++j) {
      if (m.powers[j] == 0) continue;
      double t = m.coeff * m.powers[j] * ipow(x[j], m.powers[j] - 1);
      for (int k = 0; k < dim_; ++k)
        if (k != j) t *= ipow(x[k], m.powers[k]);
      g[j] += t;
    }
  }
  return g;
}

Mat Polynomial::hessian(const Vec& x) const {
  Mat H = Mat::Zero(dim_, dim_);
  for (const Monomial& m : monomials_) {
    for (int a = 0; a < dim_; ++a) {
      for (int b = 0; b < dim_; ++b) {
        std::vector<int> e = m.powers;
        double c = m.coeff;
        c *= e[a];
        if (e[a] == 0) continue;
        --e[a];
        c *= e[b];
        if (e[b] == 0) continue;
        --e[b];
        for (int k = 0; k < dim_; ++k) c *= ipow(x[k], e[k]);
        H(a, b) += c;
      }
    }
  }
  return H;
}

ClockDriver ClockDriver::affine_time(double t0) {
  ClockDriver c;
  c.kind_ = Kind::AffineTime;
  c.freq_ = Vec::Ones(1);
  c.eta0_ = Vec::Constant(1, t0);
  return c;
}

ClockDriver ClockDriver::periodic(double frequency, double eta0) {
  ClockDriver c;
  c.kind_ = Kind::Periodic;
  c.freq_ = Vec::Constant(1, frequency);
  c.eta0_ = Vec::Constant(1, mod1(eta0));
  return c;
}

ClockDriver ClockDriver::quasiperiodic(Vec frequencies, Vec eta0) {
  if (frequencies.size() != eta0.size() || frequencies.size() == 0)
    throw ConfigError("quasiperiodic clock needs matching frequency and state dimensions", "clock");
  ClockDriver c;
  c.kind_ = Kind::Quasiperiodic;
  c.freq_ = std::move(frequencies);
  c.eta0_ = c.normalize_torus(eta0);
  return c;
}

ClockDriver ClockDriver::custom(FlowFn flow, GeneratorFn generator, Vec eta0) {
  if (!flow || !generator) throw ConfigError("custom clock needs a flow and a generator", "clock");
  ClockDriver c;
  c.kind_ = Kind::Custom;
  c.flow_ = std::move(flow);
  c.gen_ = std::move(generator);
  c.eta0_ = std::move(eta0);
  return c;
}

ClockDriver ClockDriver::linear(Vec rates, Vec eta0) {
  if (rates.size() != eta0.size() || rates.size() == 0)
    throw ConfigError("custom clock needs matching rate and state dimensions", "clock");
  ClockDriver c;
  c.kind_ = Kind::Custom;
  c.freq_ = std::move(rates);
  c.eta0_ = std::move(eta0);
  return c;
}

Vec ClockDriver::normalize_torus(const Vec& eta) {
  Vec r = eta;
  for (Eigen::Index k = 0; k < r.size(); ++k) r[k] = mod1(r[k]);
  return r;
}

Vec ClockDriver::advance(const Vec& eta, double s) const {
  if (kind_ == Kind::Custom && freq_.size() == 0) return flow_(eta, s);
  Vec r = eta + s * freq_;
  return periodic_state() ? normalize_torus(r) : r;
}

Vec ClockDriver::generator(const Vec& eta) const {
  if (kind_ == Kind::Custom && freq_.size() == 0) return gen_(eta);
  return freq_;
}

Vec ClockDriver::normalize(const Vec& eta) const { return periodic_state() ? normalize_torus(eta) : eta; }

const Expression& Perturbation::hamiltonian() const {
  if (const auto* h = std::get_if<HamiltonianField>(&field)) return h->h;
  throw ConfigError("perturbation is not Hamiltonian", "perturbation");
}

void SystemConfig::finalize() {
  penduli.validate();
  if (rotator.dim() < 1) throw ConfigError("rotator dimension must be at least 1", "rotator");
  if (clock.dim() < 1) throw ConfigError("clock state dimension must be at least 1", "clock");
  const Layout L = layout();
  const bool periodic_eta = clock.periodic_state();
  if (const auto* g = std::get_if<GeneralField>(&perturbation.field)) {
    if (static_cast<int>(g->components.size()) != 2 * L.n + 2 * L.d)
      throw ConfigError("general field needs 2n + 2d components", "perturbation/components");
    for (std::size_t k = 0; k < g->components.size(); ++k)
      g->components[k].validate(L, periodic_eta, "perturbation/components/" + std::to_string(k));
  } else {
    perturbation.hamiltonian().validate(L, periodic_eta, "perturbation/h");
  }
  if (perturbation.lipschitz && !(*perturbation.lipschitz >= 0.0))
    throw ConfigError("lipschitz scale must be non-negative", "perturbation/lipschitz");
  if (!(domain.tube >= 0.0)) throw ConfigError("tube width must be non-negative", "domain/tube");
  if (domain.tube == 0.0) {
    double scale = std::numeric_limits<double>::infinity();
    for (const TrigPotential& V : penduli.potentials) {
      double m = 0.0;
      for (int k = 0; k < 1000; ++k) m = std::max(m, std::abs(V.value(k / 1000.0)));
      scale = std::min(scale, m);
    }
    domain.tube = 0.5 * scale;
  }
  if (domain.action_center.size() == 0) domain.action_center = Vec::Zero(L.d);
  if (domain.action_center.size() != L.d)
    throw ConfigError("action center dimension differs from rotator dimension", "domain/action_center");
  if (!(domain.action_radius > 0.0)) throw ConfigError("action radius must be positive", "domain/action_radius");
}

AugmentedState AugmentedState::make(const Layout& L, const Vec& p, const Vec& q, const Vec& action,
                                    const Vec& angle, const Vec& eta) {
  Vec z(L.size());
  z << p, q, action, angle, eta;
  AugmentedState x(L, std::move(z));
  for (int i = 0; i < L.n; ++i) x.z_[L.q(i)] = mod1(x.z_[L.q(i)]);
  for (int j = 0; j < L.d; ++j) x.z_[L.angle(j)] = mod1(x.z_[L.angle(j)]);
  return x;
}

void AugmentedState::normalize(const ClockDriver& clock) {
  for (int i = 0; i < L_.n; ++i) z_[L_.q(i)] = mod1(z_[L_.q(i)]);
  for (int j = 0; j < L_.d; ++j) z_[L_.angle(j)] = mod1(z_[L_.angle(j)]);
  z_.segment(L_.eta(0), L_.m) = clock.normalize(z_.segment(L_.eta(0), L_.m));
}

double pendulum_energy(const PenduliSpec& spec, int i, double p, double q) {
  if (i < 0 || i >= spec.count()) throw std::out_of_range("pendulum index out of range");
  return spec.signs[i] * (0.5 * p * p + spec.potentials[i].value(q));
}

Eigen::Vector2d pendulum_energy_gradient(const PenduliSpec& spec, int i, double p, double q) {
  if (i < 0 || i >= spec.count()) throw std::out_of_range("pendulum index out of range");
  return {spec.signs[i] * p, spec.signs[i] * spec.potentials[i].d1(q)};
}

Vec unperturbed_field(const SystemConfig& cfg, const Vec& z) {
  const Layout L = cfg.layout();
  Vec f = Vec::Zero(L.size());
  for (int i = 0; i < L.n; ++i) {
    const int s = cfg.penduli.signs[i];
    f[L.p(i)] = -s * cfg.penduli.potentials[i].d1(z[L.q(i)]);
    f[L.q(i)] = s * z[L.p(i)];
  }
  f.segment(L.angle(0), L.d) = cfg.rotator.omega(z.segment(L.action(0), L.d));
  f.segment(L.eta(0), L.m) = cfg.clock.generator(z.segment(L.eta(0), L.m));
  return f;
}

Vec unperturbed_field(const SystemConfig& cfg, const AugmentedState& x) { return unperturbed_field(cfg, x.raw()); }

Vec perturbation_field(const SystemConfig& cfg, const Vec& z) {
  const Layout L = cfg.layout();
  Vec f = Vec::Zero(L.size());
  if (const auto* g = std::get_if<GeneralField>(&cfg.perturbation.field)) {
    for (int k = 0; k < 2 * L.n + 2 * L.d; ++k) f[k] = g->components[k].value(L, z);
    return f;
  }
  const Vec dh = cfg.perturbation.hamiltonian().gradient(L, z);
  for (int i = 0; i < L.n; ++i) {
    f[L.p(i)] = -dh[L.q(i)];
    f[L.q(i)] = dh[L.p(i)];
  }
  for (int j = 0; j < L.d; ++j) {
    f[L.action(j)] = -dh[L.angle(j)];
    f[L.angle(j)] = dh[L.action(j)];
  }
  return f;
}

bool in_domain(const SystemConfig& cfg, const Vec& z) {
  const Layout L = cfg.layout();
  for (int i = 0; i < L.n; ++i)
    if (std::abs(pendulum_energy(cfg.penduli, i, z[L.p(i)], z[L.q(i)])) > cfg.domain.tube) return false;
  if (std::isfinite(cfg.domain.action_radius) &&
      (z.segment(L.action(0), L.d) - cfg.domain.action_center).norm() > cfg.domain.action_radius)
    return false;
  return true;
}

Vec perturbed_field(const SystemConfig& cfg, const AugmentedState& x, double eps) {
  if (!in_domain(cfg, x.raw())) throw DomainError("state outside the domain", 0.0);
  Vec f = unperturbed_field(cfg, x.raw());
  if (eps != 0.0) f += eps * perturbation_field(cfg, x.raw());
  return f;
}

double perturbation_on_energy(const SystemConfig& cfg, int i, const Vec& z) {
  const Layout L = cfg.layout();
  if (i < 0 || i >= L.n) throw std::out_of_range("pendulum index out of range");
  const Eigen::Vector2d dP = pendulum_energy_gradient(cfg.penduli, i, z[L.p(i)], z[L.q(i)]);
  if (const auto* g = std::get_if<GeneralField>(&cfg.perturbation.field))
    return g->components[L.p(i)].value(L, z) * dP[0] + g->components[L.q(i)].value(L, z) * dP[1];
  const Vec dh = cfg.perturbation.hamiltonian().gradient(L, z);
  return -dh[L.q(i)] * dP[0] + dh[L.p(i)] * dP[1];
}

double perturbation_on_energy(const SystemConfig& cfg, int i, const AugmentedState& x) {
  return perturbation_on_energy(cfg, i, x.raw());
}

}  // namespace melnikov
