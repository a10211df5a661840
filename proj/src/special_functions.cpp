#include "cumdamage/special_functions.hpp"

#include <math.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace cumdamage::special {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;
constexpr std::size_t kFactorialTable = 4096;

const std::array<double, kFactorialTable>& factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTable> t{};
    t[0] = 0.0;
    for (std::size_t i = 1; i < kFactorialTable; ++i) {
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    }
    return t;
  }();
  return table;
}

// P(a, x) by its power series; valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Q(a, x) by the modified Lentz continued fraction; valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_factorial(std::uint64_t n) {
  if (n < kFactorialTable) return factorial_table()[n];
  return log_gamma(static_cast<double>(n) + 1.0);
}

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

namespace {

// ln n! - ((n + 1/2) ln n - n + ln sqrt(2 pi)).
double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12, s1 = 1.0 / 360, s2 = 1.0 / 1260, s3 = 1.0 / 1680,
                   s4 = 1.0 / 1188;
  if (n <= 15.0) {
    return log_factorial(static_cast<std::uint64_t>(n)) - (n + 0.5) * std::log(n) + n -
           0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// k ln(k / m) + m - k without cancellation when k is close to m.
double deviance(double k, double m) {
  if (std::abs(k - m) < 0.1 * (k + m)) {
    double v = (k - m) / (k + m);
    double s = (k - m) * v;
    double term = 2.0 * k * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      term *= v;
      const double next = s + term / (2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return k * std::log(k / m) + m - k;
}

}  // namespace

double poisson_pmf(std::uint64_t j, double x) {
  if (x <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (j == 0) return std::exp(-x);
  // Saddle-point form (Loader): full relative precision for large j and x.
  const double k = static_cast<double>(j);
  return std::exp(-stirling_error(k) - deviance(k, x)) / std::sqrt(2.0 * std::numbers::pi * k);
}

void poisson_weights(double x, double tail_tolerance, std::uint64_t cap,
                     std::uint64_t extra, std::vector<double>& out) {
  out.clear();
  if (x <= 0.0) {
    out.push_back(1.0);
    return;
  }
  const auto mode = static_cast<std::uint64_t>(std::min(std::floor(x), static_cast<double>(cap)));
  const double p_mode = poisson_pmf(mode, x);

  // Upwards from the mode until the geometric tail bound is negligible.
  std::vector<double> upper{p_mode};
  std::uint64_t j = mode;
  double p = p_mode;
  std::uint64_t past = 0;
  while (j < cap) {
    const double ratio = x / static_cast<double>(j + 1);
    if (ratio < 1.0 && p * ratio / (1.0 - ratio) < tail_tolerance) {
      if (past >= extra) break;
      ++past;
    }
    p *= ratio;
    ++j;
    upper.push_back(p);
  }

  out.resize(mode + upper.size());
  std::copy(upper.begin(), upper.end(), out.begin() + static_cast<std::ptrdiff_t>(mode));
  p = p_mode;
  for (std::uint64_t k = mode; k > 0; --k) {
    p *= static_cast<double>(k) / x;
    out[k - 1] = p;
  }
}

void poisson_upper_tails(double y, std::size_t count, std::vector<double>& out) {
  out.assign(count, 0.0);
  if (count == 0) return;
  if (y <= 0.0) {
    out[0] = 1.0;
    return;
  }
  const std::size_t last = count - 1;
  double q = last == 0 ? 1.0 : gamma_p(static_cast<double>(last), y);
  out[last] = q;
  if (last == 0) return;
  // pmf(last - 1), then walk down: Q_j = Q_{j+1} + pmf(j).
  double pmf = poisson_pmf(last - 1, y);
  for (std::size_t j = last; j-- > 0;) {
    q += pmf;
    out[j] = q;
    if (j > 0) pmf *= static_cast<double>(j) / y;
  }
  out[0] = 1.0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  // Upper half by symmetry: 1 - p is exact there and the tail keeps full
  // relative precision.
  if (p > 0.5) return -normal_quantile(1.0 - p);

  // Acklam's rational approximation, then one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double erlang_quantile_unit(std::uint64_t n, double q) {
  const double a = static_cast<double>(n);
  double lo = 0.0;
  double hi = a + 10.0 * std::sqrt(a) + 50.0;
  // Compare upper tails when q is close to 1, where 1 - q is exact.
  const bool upper = q > 0.5;
  const auto below = [&](double x) { return upper ? gamma_q(a, x) > 1.0 - q : gamma_p(a, x) < q; };
  while (below(hi)) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace cumdamage::special
