#pragma once

#include "melnikov/model.hpp"

#include <iosfwd>
#include <vector>

namespace melnikov {

/// Hyperbolic rates of the penduli saddles: V_i''(0) = -lambda_i^2.
struct SaddleData {
  Vec lambda;
  double lambda_plus = 0.0;  // min_i lambda_i
};

SaddleData saddle_data(const PenduliSpec& spec);

struct SeparatrixOptions {
  double start_offset = 1e-8;     // distance from the saddle where the numeric branches start
  double table_step = 0.005;      // in units of 1 / lambda_i
  double half_width = 40.0;       // S_max in units of 1 / lambda_i
  double time_budget = 400.0;     // maximal excursion time, in units of 1 / lambda_i
  double abs_tol = 1e-15;
  double rel_tol = 1e-13;
  bool force_numeric = false;     // build tables even where a closed form exists
};

/// Point of a single separatrix together with its s-derivative (analytic for
/// closed forms, the derivative of the interpolant for tables).
/// dq is the displacement from the saddle copy the orbit is asymptotic to
/// on that side (q itself is dq mod 1).
struct OrbitSample {
  double p = 0.0;
  double dq = 0.0;
  double dp_ds = 0.0;
  double ddq_ds = 0.0;

  double q() const { return mod1(dq); }
};

/// Homoclinic orbit of one pendulum, with the apex (maximal |p|) at s = 0.
class PendulumSeparatrix {
 public:
  /// Cosine potential A (cos 2 pi q - 1) with sign +1.
  static PendulumSeparatrix closed_form(double amplitude, int branch);
  /// Numeric continuation from the unstable and stable eigendirections.
  static PendulumSeparatrix numeric(const TrigPotential& V, int sign, int branch, const SeparatrixOptions& opt);

  OrbitSample eval(double s) const;

  double lambda() const { return lambda_; }
  bool is_closed_form() const { return closed_; }
  int sign() const { return sign_; }
  int branch() const { return branch_; }
  /// Integer k such that q -> k as s -> +infinity (q -> 0 as s -> -infinity).
  int wrap() const { return sign_ * branch_; }
  double apex_p() const { return apex_p_; }
  double apex_q() const { return apex_q_; }
  /// Mismatch between the apex reached from the unstable and the stable side.
  double apex_mismatch() const { return apex_mismatch_; }
  /// s-range covered by integration; the exponential tail model applies outside.
  double table_min() const { return neg_.empty() ? 0.0 : neg_.front().s; }
  double table_max() const { return pos_.empty() ? 0.0 : pos_.back().s; }

 private:
  struct Node {
    double s;
    OrbitSample x;
  };

  static OrbitSample hermite(const std::vector<Node>& t, double s);

  double lambda_ = 0.0;
  int sign_ = 1;
  int branch_ = 1;
  bool closed_ = false;
  double amplitude_ = 0.0;
  double apex_p_ = 0.0;
  double apex_q_ = 0.0;
  double apex_mismatch_ = 0.0;
  std::vector<Node> neg_;  // ascending s, ends just past s = 0
  std::vector<Node> pos_;  // ascending s, starts just before s = 0
};

/// The separatrices of all penduli and their common decay constant.
class SeparatrixOrbit {
 public:
  SeparatrixOrbit() = default;
  SeparatrixOrbit(std::vector<PendulumSeparatrix> curves, double half_width);

  int count() const { return static_cast<int>(curves_.size()); }
  const PendulumSeparatrix& curve(int i) const { return curves_.at(i); }
  double lambda(int i) const { return curves_.at(i).lambda(); }
  double lambda_plus() const { return lambda_plus_; }
  /// S_max = half_width / lambda_i.
  double half_width(int i) const { return half_width_ / lambda(i); }
  /// C with max_i ||(p_i, dq_i)(s)||_inf <= C exp(-lambda_plus |s|) for all s.
  double decay_constant() const { return decay_constant_; }

 private:
  std::vector<PendulumSeparatrix> curves_;
  double half_width_ = 40.0;
  double lambda_plus_ = 0.0;
  double decay_constant_ = 0.0;
};

/// Closed form for sign +1 cosine penduli, numeric continuation otherwise.
SeparatrixOrbit build_separatrix(const PenduliSpec& spec, const SeparatrixOptions& opt = {});

struct FamilyPoint {
  Vec p;
  Vec q;   // in [0, 1)
  Vec dq;  // displacement from the asymptotic saddle copy
  Vec dp_ds;
  Vec ddq_ds;
};

/// (p_i^0(tau_i + sigma), q_i^0(tau_i + sigma)) for every pendulum.
FamilyPoint family_point(const SeparatrixOrbit& orb, const Vec& tau, double sigma);

/// Bound on max_i ||(p_i^0, q_i^0)(s)|| for |s| >= |sigma|: 2 C exp(-lambda_plus |sigma|).
double tail_bound(const SeparatrixOrbit& orb, double sigma);

/// Writes columns s, p1, q1, p2, q2, ... sampled on [-s_max, s_max].
void write_separatrix_csv(std::ostream& os, const SeparatrixOrbit& orb, double s_max, double step);

}  // namespace melnikov
