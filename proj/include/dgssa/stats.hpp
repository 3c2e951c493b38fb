#pragma once

// Paired Student t-test.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "dgssa/error.hpp"

namespace dgssa::stats {

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// CDF of Student's t distribution with `dof` degrees of freedom.
inline double student_t_cdf(double t, double dof) {
  const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return t < 0.0 ? tail : 1.0 - tail;
}

/// Two-sided p-value P(|T| >= |t|).
inline double student_t_two_sided(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

struct TTestResult {
  double t = 0.0;
  double p_two_sided = 1.0;
  std::size_t dof = 0;
  double mean_difference = 0.0;
  double sd_difference = 0.0;
};

/// Paired t-test on d = a - b with the sample (n - 1) standard deviation.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "paired samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::LengthMismatch, "paired t-test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  bool all_equal = true;
  const double d0 = a[0] - b[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    all_equal = all_equal && d == d0;
    ss += (d - mean) * (d - mean);
  }
  if (all_equal || ss == 0.0) throw Error(Errc::ZeroVariance, "all paired differences are equal");
  TTestResult r;
  r.dof = n - 1;
  r.mean_difference = mean;
  r.sd_difference = std::sqrt(ss / static_cast<double>(n - 1));
  r.t = mean / (r.sd_difference / std::sqrt(static_cast<double>(n)));
  r.p_two_sided = student_t_two_sided(r.t, static_cast<double>(r.dof));
  return r;
}

}  // namespace dgssa::stats
