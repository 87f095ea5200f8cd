#pragma once

#include "melnikov/expression.hpp"
#include "melnikov/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace melnikov {

/// Trigonometric potential on R/Z normalized so that V(0) = 0:
///   V(q) = sum_k a_k (cos(2 pi k q) - 1) + b_k sin(2 pi k q),  k = 1, 2, ...
class TrigPotential {
 public:
  TrigPotential() = default;
  TrigPotential(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  /// V(q) = A (cos(2 pi q) - 1).
  static TrigPotential cosine(double amplitude) { return TrigPotential({amplitude}, {}); }

  double value(double q) const;
  double d1(double q) const;
  double d2(double q) const;

  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }

  /// Amplitude A when the potential is exactly A (cos(2 pi q) - 1), A > 0.
  std::optional<double> pure_cosine_amplitude() const;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

/// The n penduli P_i = sign_i (p_i^2 / 2 + V_i(q_i)).
struct PenduliSpec {
  std::vector<TrigPotential> potentials;
  std::vector<int> signs;     // each +1 or -1
  std::vector<int> branches;  // +1 selects the loop with p > 0 at the apex, -1 the other one

  PenduliSpec() = default;
  PenduliSpec(std::vector<TrigPotential> potentials, std::vector<int> signs, std::vector<int> branches = {});

  int count() const { return static_cast<int>(potentials.size()); }
  /// Checks V_i'(0) = 0, V_i''(0) < 0 and 1-periodicity; throws ConfigError.
  void validate() const;
};

/// Polynomial in the actions: sum_k c_k prod_j I_j^{e_kj}.
class Polynomial {
 public:
  struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;
  };

  Polynomial() = default;
  Polynomial(int dim, std::vector<Monomial> monomials);

  /// h0(I) = |I|^2 / 2.
  static Polynomial half_square(int dim);

  int dim() const { return dim_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

 private:
  int dim_ = 0;
  std::vector<Monomial> monomials_;
};

/// Integrable rotator h0(I) on R^d x T^d.
struct RotatorSpec {
  Polynomial h0;

  int dim() const { return h0.dim(); }
  Vec omega(const Vec& action) const { return h0.gradient(action); }
  Mat hessian(const Vec& action) const { return h0.hessian(action); }
};

/// Auxiliary flow generating the time dependence of the perturbation.
class ClockDriver {
 public:
  enum class Kind { AffineTime, Periodic, Quasiperiodic, Custom };

  using FlowFn = std::function<Vec(const Vec& eta, double s)>;
  using GeneratorFn = std::function<Vec(const Vec& eta)>;

  /// eta = t.
  static ClockDriver affine_time(double t0 = 0.0);
  /// eta in T^1 with eta' = frequency.
  static ClockDriver periodic(double frequency, double eta0 = 0.0);
  /// eta in T^m with eta' = frequencies.
  static ClockDriver quasiperiodic(Vec frequencies, Vec eta0);
  /// Arbitrary flow on R^m; the generator must be the derivative of the flow at s = 0.
  static ClockDriver custom(FlowFn flow, GeneratorFn generator, Vec eta0);
  /// Custom clock with a linear, non-wrapping flow eta' = rates.
  static ClockDriver linear(Vec rates, Vec eta0);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(eta0_.size()); }
  const Vec& eta0() const { return eta0_; }
  const Vec& frequencies() const { return freq_; }
  /// Clock coordinates live on a torus and are reduced mod 1.
  bool periodic_state() const { return kind_ == Kind::Periodic || kind_ == Kind::Quasiperiodic; }
  bool is_linear() const { return kind_ != Kind::Custom || freq_.size() > 0; }

  Vec advance(const Vec& eta, double s) const;
  Vec generator(const Vec& eta) const;
  /// Reduces periodic coordinates mod 1; identity otherwise.
  Vec normalize(const Vec& eta) const;

  void set_eta0(Vec eta0) { eta0_ = std::move(eta0); }

 private:
  static Vec normalize_torus(const Vec& eta);

  Kind kind_ = Kind::AffineTime;
  Vec freq_;
  Vec eta0_ = Vec::Zero(1);
  FlowFn flow_;
  GeneratorFn gen_;
};

/// General perturbation field given componentwise. Components follow the
/// state layout without the clock: (p[n], q[n], I[d], phi[d]).
struct GeneralField {
  std::vector<Expression> components;
};

/// Hamiltonian perturbation X^1 = J grad h.
struct HamiltonianField {
  Expression h;
};

struct Perturbation {
  std::variant<GeneralField, HamiltonianField> field = HamiltonianField{};
  /// Declared uniform C^0 bound on the field over the domain (informational).
  double bound = 0.0;
  /// Declared Lipschitz scale of the Melnikov integrands in (p, q); estimated when absent.
  std::optional<double> lipschitz;

  bool is_hamiltonian() const { return std::holds_alternative<HamiltonianField>(field); }
  const Expression& hamiltonian() const;
};

/// Domain D: |P_i| <= tube for all i and |I - action_center| <= action_radius.
struct Domain {
  double tube = 0.0;  // 0 means "use the default"
  Vec action_center;
  double action_radius = std::numeric_limits<double>::infinity();
};

struct SystemConfig {
  PenduliSpec penduli;
  RotatorSpec rotator;
  ClockDriver clock = ClockDriver::affine_time();
  Perturbation perturbation;
  Domain domain;
  double epsilon = 0.0;
  std::uint64_t seed = 1;

  Layout layout() const { return {penduli.count(), rotator.dim(), clock.dim()}; }
  /// Validates all parts and fills defaults (tube width, action center).
  void finalize();
  double tube() const { return domain.tube; }
};

/// Point of the augmented phase space. q and phi are kept in [0, 1).
class AugmentedState {
 public:
  AugmentedState() = default;
  AugmentedState(Layout L, Vec z) : L_(L), z_(std::move(z)) {}
  static AugmentedState make(const Layout& L, const Vec& p, const Vec& q, const Vec& action,
                             const Vec& angle, const Vec& eta);

  const Layout& layout() const { return L_; }
  const Vec& raw() const { return z_; }
  Vec& raw() { return z_; }

  auto p() const { return z_.segment(0, L_.n); }
  auto q() const { return z_.segment(L_.n, L_.n); }
  auto action() const { return z_.segment(2 * L_.n, L_.d); }
  auto angle() const { return z_.segment(2 * L_.n + L_.d, L_.d); }
  auto eta() const { return z_.segment(2 * L_.n + 2 * L_.d, L_.m); }

  /// Reduces q, phi (and periodic clock coordinates) mod 1.
  void normalize(const ClockDriver& clock);

 private:
  Layout L_;
  Vec z_;
};

double pendulum_energy(const PenduliSpec& spec, int i, double p, double q);
/// (dP_i/dp_i, dP_i/dq_i).
Eigen::Vector2d pendulum_energy_gradient(const PenduliSpec& spec, int i, double p, double q);

/// X^0 = J grad H_0 together with the clock generator.
Vec unperturbed_field(const SystemConfig& cfg, const Vec& z);
Vec unperturbed_field(const SystemConfig& cfg, const AugmentedState& x);

/// X^1 on the dynamic coordinates (clock entries are zero).
Vec perturbation_field(const SystemConfig& cfg, const Vec& z);

bool in_domain(const SystemConfig& cfg, const Vec& z);

/// X^0 + eps X^1; throws DomainError outside D.
Vec perturbed_field(const SystemConfig& cfg, const AugmentedState& x, double eps);

/// (X^1 P_i)(x): derivative of the i-th pendulum energy along the perturbation.
double perturbation_on_energy(const SystemConfig& cfg, int i, const Vec& z);
double perturbation_on_energy(const SystemConfig& cfg, int i, const AugmentedState& x);

}  // namespace melnikov
