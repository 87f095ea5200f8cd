#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace melnikov {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or a model that violates its hypotheses.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(field.empty() ? what : field + ": " + what), field(std::move(field)) {}
  std::string field;
};

/// A state left the configured domain (tube around the separatrices or action ball).
struct DomainError : Error {
  DomainError(const std::string& what, double at_time)
      : Error(what), time(at_time) {}
  double time;
};

/// A numerical procedure failed to reach its tolerance.
struct NumericError : Error {
  using Error::Error;
};

/// Reduces an angle to [0, 1).
inline double mod1(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Signed representative of x in [-1/2, 1/2).
inline double centered(double x) { return x - std::floor(x + 0.5); }

/// Distance on the circle R/Z.
inline double circle_dist(double a, double b) { return std::abs(centered(a - b)); }

}  // namespace melnikov
