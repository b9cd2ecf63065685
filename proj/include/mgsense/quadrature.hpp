#pragma once

// Adaptive Gauss-Kronrod (G7, K15) quadrature on finite intervals, plus
// Gauss-Hermite nodes/weights for integrals against e^{-t^2}.

#include <cmath>
#include <queue>
#include <vector>

#include "mgsense/errors.hpp"

namespace mgsense {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

namespace detail {

// QUADPACK dqk15 nodes and weights (positive half; node 7 is the midpoint).
inline constexpr double kGK15Nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kK15Weights[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double kG7Weights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
QuadResult gk15(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fmid = f(mid);
  double k15 = kK15Weights[7] * fmid;
  double g7 = kG7Weights[3] * fmid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGK15Nodes[i];
    const double pair = f(mid + dx) + f(mid - dx);
    k15 += kK15Weights[i] * pair;
    if (i % 2 == 1) g7 += kG7Weights[i / 2] * pair;
  }
  QuadResult r;
  r.value = k15 * half;
  // |K15-G7| as the error estimate: conservative (it tracks the G7 error,
  // which dominates the K15 error for smooth integrands).
  r.error = std::fabs(k15 - g7) * std::fabs(half);
  return r;
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

/// Adaptive quadrature of f over [a,b]; bisects the worst interval until the
/// summed error estimate satisfies |err| <= max(abs_tol, rel_tol*|value|).
/// Throws accuracy_error (carrying the estimate) if the interval budget runs out.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                 int max_intervals = 20000) {
  if (!(b > a)) return 0.0;
  std::priority_queue<detail::Interval> heap;
  auto first = detail::gk15(f, a, b);
  heap.push({a, b, first.value, first.error});
  double value = first.value;
  double error = first.error;
  int used = 1;
  while (error > abs_tol && error > rel_tol * std::fabs(value)) {
    if (used >= max_intervals)
      throw accuracy_error("integrate: interval budget exhausted", value, error);
    const detail::Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw accuracy_error("integrate: interval underflow", value, error);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++used;
  }
  return value;
}

/// Gauss-Hermite abscissas/weights: int_-inf^inf e^{-t^2} f(t) dt ~= sum w_i f(t_i).
/// Newton iteration on the Hermite recurrence.
inline void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw domain_error("gauss_hermite: n >= 1 required");
  constexpr double kPiQuarterInv = 0.7511255444649425;  // pi^{-1/4}
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    for (int it = 0; it < 100; ++it) {
      double p1 = kPiQuarterInv, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(j / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-14) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace mgsense
