#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include <Eigen/Core>

#include "wgldos/errors.hpp"

namespace wgldos::quad {

/// Gauss-Kronrod 7/15 abscissae (non-negative half) and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
/// Gauss weights for kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// The 15 Kronrod nodes of [a, b] in increasing order.
inline std::array<double, 15> gk15_nodes(double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  std::array<double, 15> x{};
  for (int j = 0; j < 7; ++j) {
    x[j] = c - hw * kXgk[j];
    x[14 - j] = c + hw * kXgk[j];
  }
  x[7] = c;
  return x;
}

/// Kronrod and embedded Gauss weights matching gk15_nodes order (Gauss weight 0 off-grid).
inline std::array<double, 15> gk15_kronrod_weights(double a, double b) {
  const double hw = 0.5 * (b - a);
  std::array<double, 15> w{};
  for (int j = 0; j < 7; ++j) w[j] = w[14 - j] = hw * kWgk[j];
  w[7] = hw * kWgk[7];
  return w;
}

inline std::array<double, 15> gk15_gauss_weights(double a, double b) {
  const double hw = 0.5 * (b - a);
  std::array<double, 15> w{};
  for (int j = 1; j < 7; j += 2) w[j] = w[14 - j] = hw * kWg[j / 2];
  w[7] = hw * kWg[3];
  return w;
}

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

template <class T>
struct Result {
  T value;
  double error;
  int evaluations;
};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b, const T& zero) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const T lo = f(c - hw * kXgk[j]);
    const T hi = f(c + hw * kXgk[j]);
    kron = kron + (lo + hi) * kWgk[j];
    if (j % 2 == 1) gauss = gauss + (lo + hi) * kWg[j / 2];
  }
  (void)zero;
  kron = kron * hw;
  gauss = gauss * hw;
  return {a, b, kron, magnitude(T(kron - gauss))};
}

/// Globally adaptive G7K15 on [a, b]; bisects the worst segment until the
/// summed error estimate meets max(abs_tol, rel_tol * |value|).
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, const T& zero, double rel_tol = 1e-10, double abs_tol = 0.0,
                    int max_segments = 2000) {
  std::priority_queue<Segment<T>> heap;
  Segment<T> first = gk15(f, a, b, zero);
  T total = first.value;
  double err = first.error;
  heap.push(first);
  int evals = 15;
  while (err > std::max(abs_tol, rel_tol * magnitude(total))) {
    if (static_cast<int>(heap.size()) >= max_segments) {
      if (err > 1e3 * std::max(abs_tol, rel_tol * magnitude(total)))
        throw NumericalError("adaptive quadrature did not converge");
      break;
    }
    const Segment<T> worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    const Segment<T> left = gk15(f, worst.a, m, zero);
    const Segment<T> right = gk15(f, m, worst.b, zero);
    total = total + (left.value + right.value - worst.value);
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    evals += 30;
  }
  // final sum in a fixed order, free of running-update drift
  std::vector<Segment<T>> segs;
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
  total = zero;
  err = 0.0;
  for (const auto& s : segs) {
    total = total + s.value;
    err += s.error;
  }
  return {total, err, evals};
}

}  // namespace wgldos::quad
