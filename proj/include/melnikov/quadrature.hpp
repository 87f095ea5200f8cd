#pragma once

#include "melnikov/types.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace melnikov {

struct QuadOptions {
  double abs_tol = 1e-12;
  int max_segments = 4000;
  int initial_panels = 1;
};

template <class T>
struct QuadResult {
  T value;
  double error = 0.0;  // sum of |K15 - G7| over the final panels
  int evaluations = 0;
  int segments = 0;
  bool converged = false;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& x) {
  return x.size() == 0 ? 0.0 : x.template lpNorm<Eigen::Infinity>();
}

// 15-point Kronrod extension of the 7-point Gauss rule (abscissae in descending order).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
auto gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  auto fc = f(c);
  using T = decltype(fc);
  T kron = kWgk[7] * fc;
  T gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    T f1 = f(c - dx);
    T f2 = f(c + dx);
    kron = kron + kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss = gauss + kWg[j / 2] * (f1 + f2);
  }
  kron = h * kron;
  gauss = h * gauss;
  const double err = magnitude(kron - gauss);
  return Panel<T>{a, b, kron, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature of f over [a, b].
/// f may return double or an Eigen vector; the error norm is the max norm.
template <class F>
auto integrate_gk15(F&& f, double a, double b, const QuadOptions& opt = {}) {
  using T = decltype(detail::gk15(f, a, b).value);
  using Panel = detail::Panel<T>;
  std::priority_queue<Panel> heap;
  const int panels = std::max(1, opt.initial_panels);
  QuadResult<T> out;
  double total_error = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + (b - a) * k / panels;
    const double hi = (k + 1 == panels) ? b : a + (b - a) * (k + 1) / panels;
    Panel p = detail::gk15(f, lo, hi);
    total_error += p.error;
    heap.push(std::move(p));
  }
  out.evaluations = 15 * panels;
  while (total_error > opt.abs_tol && static_cast<int>(heap.size()) < opt.max_segments) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    Panel left = detail::gk15(f, worst.a, mid);
    Panel right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total_error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  // Re-sum from the panels to avoid drift in the running totals.
  std::vector<Panel> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  out.value = all.front().value;
  out.error = all.front().error;
  for (std::size_t k = 1; k < all.size(); ++k) {
    out.value = out.value + all[k].value;
    out.error += all[k].error;
  }
  out.segments = static_cast<int>(all.size());
  out.converged = out.error <= opt.abs_tol;
  return out;
}

}  // namespace melnikov
