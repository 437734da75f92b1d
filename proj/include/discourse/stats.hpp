#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "discourse/common.hpp"

namespace discourse {

// Sample Pearson correlation coefficient. Two-pass formulation.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("pearson_r: vectors have different lengths");
  const size_t n = x.size();
  if (n < 3) throw Error("pearson_r: need at least 3 observations");

  double mean_x = 0, mean_y = 0;
  for (size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw Error("pearson_r: correlation undefined for a constant vector");
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

namespace detail {

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz algorithm.
inline double ibeta_cf(double a, double b, double x) {
  constexpr double eps = 1e-14;
  constexpr double fpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw Error("ibeta: continued fraction failed to converge");
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double ibeta_reg(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw Error("ibeta: a and b must be positive");
  if (x < 0 || x > 1) throw Error("ibeta: x must lie in [0,1]");
  if (x == 0) return 0.0;
  if (x == 1) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // Use the continued fraction on the side where it converges fast.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::ibeta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for the null r = 0, via the t statistic with n-2
// degrees of freedom: p = I_{df/(df+t^2)}(df/2, 1/2).
inline double p_value(double r, long n) {
  if (n < 3) throw Error("p_value: need at least 3 observations");
  if (std::fabs(r) > 1.0 + 1e-12)
    throw Error("p_value: |r| must not exceed 1");
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t2 = r * r * df / (1.0 - r * r);
  double p = ibeta_reg(df / 2.0, 0.5, df / (df + t2));
  if (p < 0) p = 0;
  if (p > 1) p = 1;
  return p;
}

}  // namespace discourse
