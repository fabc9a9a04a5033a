#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace nkmart::testing {

// Phi(x) via the complementary error function.
inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// E[g(N(0, var))] by the composite Simpson rule on [-w, w] standard deviations.
inline double gaussian_expectation(const std::function<double(double)>& g, double var,
                                   double w = 12.0, int n = 4000) {
  const double sd = std::sqrt(var);
  const double h = 2.0 * w / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -w + h * i;
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += weight * g(sd * u) * std::exp(-0.5 * u * u);
  }
  return s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

// Composite Simpson rule for f on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
  return s * h / 3.0;
}

// log det of a symmetric positive definite matrix (row-major, n x n) by Cholesky; NaN if not SPD.
inline double log_det_spd(std::vector<double> m, int n) {
  double ld = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (int k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
    if (!(d > 0.0)) return std::nan("");
    const double ljj = std::sqrt(d);
    m[j * n + j] = ljj;
    ld += 2.0 * std::log(ljj);
    for (int i = j + 1; i < n; ++i) {
      double v = m[i * n + j];
      for (int k = 0; k < j; ++k) v -= m[i * n + k] * m[j * n + k];
      m[i * n + j] = v / ljj;
    }
  }
  return ld;
}

// E[exp(alpha int_0^1 B dB - beta int_0^1 B^2 dt)] for the n-step Euler discretisation, written
// as a Gaussian quadratic form in the increments; infinite when the form is not integrable.
inline double discretized_ito_moment(double alpha, double beta, int n) {
  const double dt = 1.0 / n;
  // exponent = -1/2 x^T A x in the standard normal increments x (dB_i = sqrt(dt) x_i), so the
  // expectation is det(I + A)^{-1/2}.
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  // alpha sum_i B_i dB_i with B_i = sum_{j<i} dB_j: cross terms between j < i.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      m[i * n + j] -= alpha * dt;
      m[j * n + i] -= alpha * dt;
    }
  }
  // beta dt sum_i B_i^2: B_i^2 = sum_{j,k < i} dB_j dB_k.
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const int count = n - 1 - std::max(j, k);
      if (count > 0) m[j * n + k] += 2.0 * beta * dt * dt * count;
    }
  }
  for (int i = 0; i < n; ++i) m[i * n + i] += 1.0;
  const double ld = log_det_spd(m, n);
  if (std::isnan(ld)) return std::numeric_limits<double>::infinity();
  return std::exp(-0.5 * ld);
}

}  // namespace nkmart::testing
