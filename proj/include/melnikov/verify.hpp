#pragma once

#include "melnikov/melnikov.hpp"
#include "melnikov/model.hpp"
#include "melnikov/separatrix.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace melnikov {

struct IntegratorConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
};

/// Flow of X^0 + eps X^1 on the augmented phase space for time t1 - t0
/// (negative for backward integration). Throws DomainError with the exit time
/// when the orbit leaves the domain.
AugmentedState integrate(const SystemConfig& cfg, const AugmentedState& x, double t0, double t1, double eps,
                         const IntegratorConfig& icfg = {});

/// Raw variant on lifted coordinates (q, phi not reduced).
Vec flow(const SystemConfig& cfg, const Vec& z, double duration, double eps, const IntegratorConfig& icfg);

/// Flow restricted to the inner manifold: penduli held at the saddle, only
/// (I, phi, eta) evolve.
Vec inner_flow(const SystemConfig& cfg, const Vec& z, double duration, double eps, const IntegratorConfig& icfg);

/// The point was not representable in the (P, tau) coordinates.
struct ChartError : Error {
  using Error::Error;
};

/// Moves from the separatrix point at tau_i along the normalized gradient of
/// P_i until P_i reaches the requested level, for every pendulum.
AugmentedState chart_to_state(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& P, const Vec& tau,
                              const Phase& ph);

struct ChartCoords {
  Vec P;
  Vec tau;
};

/// Inverse of chart_to_state: P_i is the energy and tau_i the foot of the
/// normal line through the state, searched near tau_guess.
ChartCoords state_to_chart(const SystemConfig& cfg, const SeparatrixOrbit& orb, const AugmentedState& x,
                           const Vec& tau_guess);

struct ShootOptions {
  double horizon_c = 3.0;  // T = c log(1 / |eps|) / lambda_plus
  int max_newton = 20;
  IntegratorConfig integrator{1e-14, 1e-12};
};

struct GraphPoint {
  Vec tau;
  Phase phase;
  Vec P;                      // the graph value
  double horizon = 0.0;       // signed: positive for the stable graph
  double shoot_residual = 0.0;
  int newton_iterations = 0;
};

/// P-value of the perturbed stable manifold over the chart point (tau, phase).
/// Newton on P -> P(flow_T(chart(P))) along a ladder of horizons up to T.
GraphPoint stable_graph_value(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau, const Phase& ph,
                              double eps, const ShootOptions& opt = {});
/// Mirror of stable_graph_value with backward horizons.
GraphPoint unstable_graph_value(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                                const Phase& ph, double eps, const ShootOptions& opt = {});

/// Least-squares slope of log|residual| against log eps.
struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int points = 0;
};

/// Throws std::invalid_argument with fewer than 4 positive finite residuals.
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& residual);

struct SplittingRow {
  double eps = 0.0;
  Vec stable;
  Vec unstable;
  Vec measured;   // unstable - stable
  Vec predicted;  // eps * Melnikov vector
  double residual = 0.0;  // max norm of measured - predicted
};

struct SplittingReport {
  Vec tau;
  Phase phase;
  Vec melnikov;
  std::vector<SplittingRow> rows;
  std::optional<OrderFit> fit;        // residual order
  std::optional<OrderFit> graph_fit;  // order of ||stable graph value||
};

SplittingReport measure_splitting(const SystemConfig& cfg, const SeparatrixOrbit& orb, const Vec& tau,
                                  const Phase& ph, const std::vector<double>& eps_list,
                                  const ShootOptions& opt = {});

struct JumpRow {
  double eps = 0.0;
  Vec tau_homoclinic;
  Vec measured;   // I(x+) - I(x-)
  Vec predicted;  // eps * d_theta of the reduced potential
  double residual = 0.0;
  double relative_error = 0.0;
};

struct JumpReport {
  CriticalPoint critical;
  Vec dtheta;  // d_theta of the reduced potential at the critical point
  std::vector<JumpRow> rows;
  std::optional<OrderFit> fit;
};

struct JumpOptions {
  ShootOptions shoot;
  int max_root_iterations = 20;
  double root_tol = 1e-13;
  double root_residual = 1e-14;  // shooting noise floor of the unstable minus stable graph values
  ReducedOptions reduced;
};

/// Measures the action change across the perturbed homoclinic excursion near
/// the critical point and compares it with the first-order prediction.
JumpRow action_jump(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit, double eps,
                    const Vec& dtheta, const JumpOptions& opt = {});

/// d_theta of the reduced potential at the critical point's context, by
/// re-solving tau* at shifted angles.
Vec reduced_angle_derivative(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit,
                             const ReducedOptions& opt = {});

JumpReport measure_jump(const SystemConfig& cfg, const SeparatrixOrbit& orb, const CriticalPoint& crit,
                        const std::vector<double>& eps_list, const JumpOptions& opt = {});

}  // namespace melnikov
