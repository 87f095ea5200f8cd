#pragma once

#include "melnikov/model.hpp"
#include "melnikov/separatrix.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace melnikov {

/// Base point of the inner motion: actions, angles and clock state at sigma = 0.
struct Phase {
  Vec action;
  Vec angle;
  Vec eta;
};

struct MelnikovOptions {
  double tol = 1e-11;       // split evenly between quadrature and truncation
  int max_segments = 4000;  // panel budget of the adaptive quadrature
  double window_scale = 1.0;  // multiplies the truncation half-width Sigma
};

/// Integral over sigma in R closed by an analytic bound on the truncated tails.
template <class T>
struct MelnikovValue {
  T value;
  double quad_error = 0.0;
  double tail_bound = 0.0;
  double window = 0.0;  // half-width Sigma of the truncation window
  bool converged = true;
};

using ScalarValue = MelnikovValue<double>;
using VectorValue = MelnikovValue<Vec>;

/// Thrown when the Melnikov vector has no isolated non-degenerate zero.
struct DegenerateError : NumericError {
  using NumericError::NumericError;
};

/// State on the separatrix family at time sigma: (p0, q0)(tau + sigma), I,
/// phi + sigma omega(I), clock advanced by sigma. q is stored as the
/// displacement from the nearest asymptotic saddle copy.
Vec orbit_state(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                double sigma);
/// Same with all penduli at rest.
Vec inner_state(const SystemConfig& cfg, const Phase& ph, double sigma);

/// (X^1 P_i) on the separatrix minus the same on the inner orbit.
double melnikov_integrand_vector(const SystemConfig& cfg, const SeparatrixOrbit& orb, int i, const Vec& tau,
                                 double sigma, const Phase& ph);

/// Scale L with |f(x) - f(x_inner)| <= L max_i ||(p_i, q_i)||_inf near the saddle,
/// for f = (X^1 P_i) ("vector") or f = h ("potential"). A declared scale in
/// the configuration takes precedence; otherwise it is sampled.
struct LipschitzScales {
  double vector = 0.0;
  double potential = 0.0;
  double potential_phi = 0.0;  // for d h / d phi
};
LipschitzScales lipschitz_scales(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Phase& ph);

VectorValue melnikov_vector(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                            const MelnikovOptions& opt = {});

/// Requires a Hamiltonian perturbation; throws ConfigError otherwise.
ScalarValue melnikov_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt = {});

/// d/dtau of the potential by quadrature of the differentiated integrand
/// (chain rule through the separatrix derivative).
VectorValue grad_tau_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt = {});

/// d/dphi of the potential at fixed tau by quadrature of d h / d phi.
VectorValue grad_phi_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                               const Phase& ph, const MelnikovOptions& opt = {});

/// Single-pendulum potential with all other penduli at rest.
ScalarValue partial_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, int i, double varsigma,
                              const Phase& ph, const MelnikovOptions& opt = {});

/// |M(tau) - sum_i M_i(tau_i)|, integrated as one combined integrand.
ScalarValue additivity_gap(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                           const MelnikovOptions& opt = {});

struct CriticalPoint {
  Vec tau_star;
  double residual_norm = 0.0;
  Mat jacobian;
  Vec singular_values;
  int rank = 0;
  double condition = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // ||M(tau_k)|| for every Newton iterate
  Phase context;
  bool nondegenerate() const { return rank == tau_star.size(); }
};

struct NewtonOptions {
  double tol = 1e-10;          // on ||M(tau)||, multiplied by the scale of M
  double scale = 1.0;
  double jacobian_step = 1e-5;
  int max_iterations = 50;
  MelnikovOptions quad{1e-13, 4000};
};

/// Damped Newton on tau -> M(tau) with a central-difference Jacobian.
CriticalPoint find_critical_tau(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau_guess,
                                const Phase& ph, const NewtonOptions& opt = {});

struct SeedGrid {
  double lo = 0.0;
  double hi = 1.0;
  int points = 8;  // per dimension
};

/// Scans a grid of points^n seeds on [lo, hi)^n, sets the Newton scale from
/// the sampled magnitude of M and runs Newton from the best seeds.
CriticalPoint locate_critical_tau(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Phase& ph,
                                  const SeedGrid& grid = {}, NewtonOptions opt = {});

struct ReducedSample {
  Vec action;
  Vec theta;
  double value = 0.0;
  Vec dtheta;            // by re-solving tau* at theta +- step
  Vec dI;
  Vec dtheta_envelope;   // d phi of the potential at fixed tau*
  Vec tau_star;
};

struct ReducedOptions {
  double step = 1e-4;
  double branch_jump = 0.1;
  double envelope_tol = 1e-4;
  NewtonOptions newton;
};

/// Follows one branch of critical points tau*(I, theta) by warm-started Newton.
/// The clock state is the configured initial clock state.
class ReducedBranch {
 public:
  ReducedBranch(const SystemConfig& cfg, const SeparatrixOrbit& orb, Vec tau_seed, ReducedOptions opt = {});

  /// Reduced potential and its derivatives at (I, theta); throws
  /// DegenerateError on H3 failure and NumericError on branch loss.
  ReducedSample sample(const Vec& action, const Vec& theta);

  const Vec& tau() const { return tau_; }

 private:
  CriticalPoint solve(const Vec& action, const Vec& theta, const Vec& guess) const;

  const SystemConfig& cfg_;
  const SeparatrixOrbit& orb_;
  Vec tau_;
  ReducedOptions opt_;
};

/// One-shot reduced potential: seeds from tau_guess (or a grid scan when empty).
ReducedSample reduced_potential(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& action,
                                const Vec& theta, const std::optional<Vec>& tau_guess = std::nullopt,
                                const ReducedOptions& opt = {});

}  // namespace melnikov
