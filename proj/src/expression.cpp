#include "melnikov/expression.hpp"

#include <cmath>

namespace melnikov {

int Layout::offset(Var v) const {
  switch (v.kind) {
    case VarKind::P: return p(v.index);
    case VarKind::Q: return q(v.index);
    case VarKind::I: return action(v.index);
    case VarKind::Phi: return angle(v.index);
    case VarKind::Eta: return eta(v.index);
  }
  return -1;
}

bool Layout::contains(Var v) const {
  if (v.index < 0) return false;
  switch (v.kind) {
    case VarKind::P:
    case VarKind::Q: return v.index < n;
    case VarKind::I:
    case VarKind::Phi: return v.index < d;
    case VarKind::Eta: return v.index < m;
  }
  return false;
}

std::string var_name(Var v, bool affine_time) {
  const std::string idx = std::to_string(v.index + 1);
  switch (v.kind) {
    case VarKind::P: return "p" + idx;
    case VarKind::Q: return "q" + idx;
    case VarKind::I: return "I" + idx;
    case VarKind::Phi: return "phi" + idx;
    case VarKind::Eta: return (affine_time && v.index == 0) ? "t" : "eta" + idx;
  }
  return {};
}

Var parse_var(const std::string& name, bool affine_time) {
  if (name == "t") {
    if (!affine_time) throw ConfigError("variable 't' requires the affine-time clock", name);
    return {VarKind::Eta, 0};
  }
  auto split = [&](const std::string& prefix, VarKind kind) -> std::pair<bool, Var> {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return {false, {}};
    const std::string digits = name.substr(prefix.size());
    for (char c : digits)
      if (c < '0' || c > '9') return {false, {}};
    const int k = std::stoi(digits);
    if (k < 1) throw ConfigError("variable indices start at 1", name);
    return {true, Var{kind, k - 1}};
  };
  // "phi" before "p" so that phi1 is not read as p + "hi1".
  for (auto [prefix, kind] : {std::pair{std::string("phi"), VarKind::Phi}, {"eta", VarKind::Eta},
                              {"p", VarKind::P}, {"q", VarKind::Q}, {"I", VarKind::I}}) {
    auto [ok, v] = split(prefix, kind);
    if (ok) return v;
  }
  throw ConfigError("unknown variable", name);
}

Factor Factor::power(Var v, int k) {
  Factor f;
  f.kind = Kind::Power;
  f.var = v;
  f.exponent = k;
  return f;
}

Factor Factor::cos(std::vector<std::pair<Var, double>> wave, double phase) {
  Factor f;
  f.kind = Kind::Cos;
  f.wave = std::move(wave);
  f.phase = phase;
  return f;
}

Factor Factor::sin(std::vector<std::pair<Var, double>> wave, double phase) {
  Factor f = cos(std::move(wave), phase);
  f.kind = Kind::Sin;
  return f;
}

Factor Factor::sech(Var v, double rate, double center) {
  Factor f;
  f.kind = Kind::Sech;
  f.var = v;
  f.rate = rate;
  f.center = center;
  return f;
}

Factor Factor::gauss(Var v, double rate, double center) {
  Factor f = sech(v, rate, center);
  f.kind = Kind::Gauss;
  return f;
}

namespace {

double wave_argument(const Factor& f, const Layout& L, const Vec& z) {
  double arg = f.phase;
  for (const auto& [v, a] : f.wave) arg += a * z[L.offset(v)];
  return kTwoPi * arg;
}

}  // namespace

double Factor::value(const Layout& L, const Vec& z) const {
  switch (kind) {
    case Kind::Power: return std::pow(z[L.offset(var)], exponent);
    case Kind::Cos: return std::cos(wave_argument(*this, L, z));
    case Kind::Sin: return std::sin(wave_argument(*this, L, z));
    case Kind::Sech: return 1.0 / std::cosh(rate * (z[L.offset(var)] - center));
    case Kind::Gauss: {
      const double u = z[L.offset(var)] - center;
      return std::exp(-rate * u * u);
    }
  }
  return 0.0;
}

void Factor::add_gradient(const Layout& L, const Vec& z, double scale, Eigen::Ref<Vec> grad) const {
  switch (kind) {
    case Kind::Power: {
      if (exponent == 0) return;
      const double x = z[L.offset(var)];
      grad[L.offset(var)] += scale * exponent * std::pow(x, exponent - 1);
      return;
    }
    case Kind::Cos:
    case Kind::Sin: {
      const double arg = wave_argument(*this, L, z);
      const double d = kind == Kind::Cos ? -std::sin(arg) : std::cos(arg);
      for (const auto& [v, a] : wave) grad[L.offset(v)] += scale * kTwoPi * a * d;
      return;
    }
    case Kind::Sech: {
      const double u = rate * (z[L.offset(var)] - center);
      const double s = 1.0 / std::cosh(u);
      grad[L.offset(var)] += -scale * rate * s * std::tanh(u);
      return;
    }
    case Kind::Gauss: {
      const double u = z[L.offset(var)] - center;
      grad[L.offset(var)] += -scale * 2.0 * rate * u * std::exp(-rate * u * u);
      return;
    }
  }
}

bool Factor::depends_on(VarKind k) const {
  if (kind == Kind::Cos || kind == Kind::Sin) {
    for (const auto& [v, a] : wave)
      if (v.kind == k && a != 0.0) return true;
    return false;
  }
  if (kind == Kind::Power && exponent == 0) return false;
  return var.kind == k;
}

double Expression::value(const Layout& L, const Vec& z) const {
  double sum = 0.0;
  for (const Term& t : terms_) {
    double prod = t.coeff;
    for (const Factor& f : t.factors) prod *= f.value(L, z);
    sum += prod;
  }
  return sum;
}

Vec Expression::gradient(const Layout& L, const Vec& z) const {
  Vec g = Vec::Zero(L.size());
  add_gradient(L, z, 1.0, g);
  return g;
}

void Expression::add_gradient(const Layout& L, const Vec& z, double scale, Eigen::Ref<Vec> grad) const {
  std::vector<double> vals;
  std::vector<double> suffix;
  for (const Term& t : terms_) {
    const std::size_t k = t.factors.size();
    vals.resize(k);
    suffix.assign(k + 1, 1.0);
    for (std::size_t j = 0; j < k; ++j) vals[j] = t.factors[j].value(L, z);
    for (std::size_t j = k; j-- > 0;) suffix[j] = suffix[j + 1] * vals[j];
    double prefix = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      t.factors[j].add_gradient(L, z, scale * t.coeff * prefix * suffix[j + 1], grad);
      prefix *= vals[j];
    }
  }
}

bool Expression::depends_on(VarKind k) const {
  for (const Term& t : terms_)
    for (const Factor& f : t.factors)
      if (t.coeff != 0.0 && f.depends_on(k)) return true;
  return false;
}

void Expression::validate(const Layout& L, bool periodic_eta, const std::string& where) const {
  auto is_angle = [&](Var v) {
    return v.kind == VarKind::Q || v.kind == VarKind::Phi || (v.kind == VarKind::Eta && periodic_eta);
  };
  for (std::size_t ti = 0; ti < terms_.size(); ++ti) {
    for (const Factor& f : terms_[ti].factors) {
      const std::string at = where + "/" + std::to_string(ti);
      if (f.kind == Factor::Kind::Cos || f.kind == Factor::Kind::Sin) {
        for (const auto& [v, a] : f.wave) {
          if (!L.contains(v)) throw ConfigError("variable out of range", at);
          if (is_angle(v) && a != std::round(a))
            throw ConfigError("angle " + var_name(v, !periodic_eta) + " needs an integer frequency", at);
        }
      } else {
        if (!L.contains(f.var)) throw ConfigError("variable out of range", at);
        if (is_angle(f.var))
          throw ConfigError("angle " + var_name(f.var, !periodic_eta) + " may only enter through cos/sin", at);
        if (f.kind == Factor::Kind::Power && f.exponent < 0)
          throw ConfigError("negative exponent", at);
      }
    }
  }
}

Expression Expression::operator+(const Expression& other) const {
  std::vector<Term> t = terms_;
  t.insert(t.end(), other.terms_.begin(), other.terms_.end());
  return Expression(std::move(t));
}

Expression Expression::operator*(double c) const {
  std::vector<Term> t = terms_;
  for (Term& term : t) term.coeff *= c;
  return Expression(std::move(t));
}

}  // namespace melnikov
