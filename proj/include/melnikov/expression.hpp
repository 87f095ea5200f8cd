#pragma once

#include "melnikov/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace melnikov {

/// Coordinate families of the augmented phase space.
enum class VarKind { P, Q, I, Phi, Eta };

struct Var {
  VarKind kind = VarKind::P;
  int index = 0;  // zero-based

  friend bool operator==(const Var&, const Var&) = default;
};

/// Flat layout of an augmented state z = (p[n], q[n], I[d], phi[d], eta[m]).
struct Layout {
  int n = 0;
  int d = 0;
  int m = 0;

  int size() const { return 2 * n + 2 * d + m; }
  int p(int i) const { return i; }
  int q(int i) const { return n + i; }
  int action(int j) const { return 2 * n + j; }
  int angle(int j) const { return 2 * n + d + j; }
  int eta(int k) const { return 2 * n + 2 * d + k; }

  int offset(Var v) const;
  bool contains(Var v) const;

  friend bool operator==(const Layout&, const Layout&) = default;
};

/// Variable name as used in configuration files ("p1", "q2", "I1", "phi1", "eta1", "t").
std::string var_name(Var v, bool affine_time);
/// Inverse of var_name; throws ConfigError on unknown names.
Var parse_var(const std::string& name, bool affine_time);

/// One multiplicative factor of a term.
///
/// Cos/Sin take the argument 2*pi*(sum_k a_k x_k + phase). Power is x^k.
/// Sech is sech(rate * (x - center)) and Gauss is exp(-rate * (x - center)^2).
struct Factor {
  enum class Kind { Power, Cos, Sin, Sech, Gauss };

  Kind kind = Kind::Power;
  std::vector<std::pair<Var, double>> wave;  // Cos, Sin
  double phase = 0.0;                         // Cos, Sin
  Var var;                                    // Power, Sech, Gauss
  int exponent = 1;                           // Power
  double rate = 1.0;                          // Sech, Gauss
  double center = 0.0;                        // Sech, Gauss

  static Factor power(Var v, int k);
  static Factor cos(std::vector<std::pair<Var, double>> wave, double phase = 0.0);
  static Factor sin(std::vector<std::pair<Var, double>> wave, double phase = 0.0);
  static Factor sech(Var v, double rate, double center = 0.0);
  static Factor gauss(Var v, double rate, double center = 0.0);

  double value(const Layout& L, const Vec& z) const;
  /// Adds scale * d(factor)/dz into grad.
  void add_gradient(const Layout& L, const Vec& z, double scale, Eigen::Ref<Vec> grad) const;
  bool depends_on(VarKind k) const;
};

struct Term {
  double coeff = 1.0;
  std::vector<Factor> factors;
};

/// Finite sum of products of elementary factors, with analytic first derivatives.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::vector<Term> terms) : terms_(std::move(terms)) {}

  static Expression zero() { return {}; }
  static Expression constant(double c) { return Expression({Term{c, {}}}); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double value(const Layout& L, const Vec& z) const;
  Vec gradient(const Layout& L, const Vec& z) const;
  void add_gradient(const Layout& L, const Vec& z, double scale, Eigen::Ref<Vec> grad) const;
  bool depends_on(VarKind k) const;

  /// Checks every referenced variable exists in L and that angle variables
  /// only enter through integer-frequency waves (periodic_eta marks clock
  /// coordinates living on a torus).
  void validate(const Layout& L, bool periodic_eta, const std::string& where) const;

  Expression operator+(const Expression& other) const;
  Expression operator*(double c) const;

 private:
  std::vector<Term> terms_;
};

}  // namespace melnikov
