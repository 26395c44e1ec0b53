#pragma once

// Single-step kernels shared by the flow stepping code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace conoflow::detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, const Vec<N>& k) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
  return out;
}

template <std::size_t N>
struct RkStep {
  Vec<N> y;
  /// Scaled error norm; accept when <= 1.
  double error = 0.0;
};

/// One Dormand-Prince 5(4) step with mixed absolute/relative error scaling.
template <std::size_t N, class Rhs>
RkStep<N> dopri5(const Rhs& f, const Vec<N>& y0, double h, double atol, double rtol) {
  constexpr double a21 = 1.0 / 5.0;
  constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                   a54 = -212.0 / 729.0;
  constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                   a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                   b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                   e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  const Vec<N> k1 = f(y0);
  Vec<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y0[i] + h * a21 * k1[i];
  const Vec<N> k2 = f(tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const Vec<N> k3 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const Vec<N> k4 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const Vec<N> k5 = f(tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  const Vec<N> k6 = f(tmp);

  RkStep<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y[i] = y0[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  const Vec<N> k7 = f(out.y);

  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(out.y[i]));
    err = std::max(err, std::abs(e) / scale);
  }
  out.error = err;
  return out;
}

/// Step-size update for an embedded pair of order `order`.
inline double next_step(double h, double error, int order) {
  if (error == 0.0) return h * 5.0;
  const double factor = 0.9 * std::pow(error, -1.0 / (order + 1));
  return h * std::clamp(factor, 0.2, 5.0);
}

struct CollocationResult {
  bool converged = false;
  int iterations = 0;
};

/// One 3-stage Gauss-Legendre collocation panel, the stage equations solved
/// by fixed-point (Picard) iteration on the integral form.
template <std::size_t N, class Rhs>
CollocationResult gauss_legendre_panel(const Rhs& f, const Vec<N>& y0, double h, Vec<N>& y1,
                                       double tol, int max_iterations = 60) {
  static const double s15 = std::sqrt(15.0);
  static const double A[3][3] = {
      {5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0},
      {5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0},
      {5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0}};
  static const double b[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

  std::array<Vec<N>, 3> k;
  const Vec<N> f0 = f(y0);
  k.fill(f0);

  CollocationResult result;
  for (int it = 0; it < max_iterations; ++it) {
    std::array<Vec<N>, 3> next;
    for (int s = 0; s < 3; ++s) {
      Vec<N> arg = y0;
      for (int j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < N; ++i) arg[i] += h * A[s][j] * k[j][i];
      next[s] = f(arg);
    }
    double change = 0.0;
    double scale = 1.0;
    for (int s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < N; ++i) {
        change = std::max(change, std::abs(next[s][i] - k[s][i]));
        scale = std::max(scale, std::abs(next[s][i]));
      }
    k = next;
    result.iterations = it + 1;
    if (std::abs(h) * change <= tol * scale * 1e-3 || change <= 1e-15 * scale) {
      result.converged = true;
      break;
    }
  }
  y1 = y0;
  for (int s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < N; ++i) y1[i] += h * b[s] * k[s][i];
  return result;
}

}  // namespace conoflow::detail
