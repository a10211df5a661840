#include "cumdamage/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

#include "cumdamage/error.hpp"

namespace cumdamage {

namespace {

// Kronrod 15 nodes (positive half, centre last) and weights; Gauss 7 weights
// sit on the odd Kronrod nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kKronrod[7];
  double g = fc * kGauss[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = h * kNodes[i];
    const double s = f(c - dx) + f(c + dx);
    k += kKronrod[i] * s;
    if (i % 2 == 1) g += kGauss[i / 2] * s;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options,
                           const std::vector<double>& breakpoints) {
  QuadratureResult result;
  if (!(b > a)) return result;

  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Segment> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment s = gauss_kronrod(f, cuts[i], cuts[i + 1]);
    result.evaluations += 15;
    total += s.value;
    error += s.error;
    heap.push(s);
  }

  while (error > std::max(options.abs_tol, options.rel_tol * std::abs(total))) {
    if (heap.size() >= options.max_intervals) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate "
          << error << " after " << heap.size() << " intervals";
      throw NumericalError(msg.str());
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval no longer divisible in floating point; accept its estimate.
      error -= worst.error;
      heap.push({worst.a, worst.b, worst.value, 0.0});
      continue;
    }
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  result.value = total;
  result.error = error;
  return result;
}

}  // namespace cumdamage
