#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppd {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class Func>
void gk15(const Func& f, double a, double b, double& kronrod, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fc = f(mid);
  double k15 = kKronrodW[7] * fc;
  double g7 = kGaussW[3] * fc;
  for (int i = 0; i < 7; ++i) {
    double x = half * kGK15Nodes[i];
    double pair = f(mid - x) + f(mid + x);
    k15 += kKronrodW[i] * pair;
    if (i % 2 == 1) g7 += kGaussW[i / 2] * pair;
  }
  kronrod = k15 * half;
  err = std::abs((k15 - g7) * half);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] to an absolute
/// tolerance.  Intervals are bisected until each local error estimate fits
/// within its share of the budget.
template <class Func>
QuadResult integrate_gk(const Func& f, double a, double b, double abs_tol = 1e-8,
                        int max_intervals = 4000) {
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  struct Interval {
    double a, b, value, error;
  };
  std::vector<Interval> work;
  work.reserve(64);
  double v, e;
  detail::gk15(f, a, b, v, e);
  res.evaluations += 15;
  work.push_back({a, b, v, e});
  int splits = 0;
  while (true) {
    double total_err = 0.0;
    int worst = -1;
    double worst_err = 0.0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      total_err += work[i].error;
      if (work[i].error > worst_err) {
        worst_err = work[i].error;
        worst = static_cast<int>(i);
      }
    }
    if (total_err <= abs_tol || worst < 0) {
      res.converged = total_err <= abs_tol;
      res.abs_error = total_err;
      break;
    }
    if (++splits > max_intervals) {
      res.converged = false;
      res.abs_error = total_err;
      break;
    }
    Interval iv = work[worst];
    double mid = 0.5 * (iv.a + iv.b);
    Interval left{iv.a, mid, 0, 0}, right{mid, iv.b, 0, 0};
    detail::gk15(f, left.a, left.b, left.value, left.error);
    detail::gk15(f, right.a, right.b, right.value, right.error);
    res.evaluations += 30;
    work[worst] = left;
    work.push_back(right);
  }
  double sum = 0.0;
  for (const auto& iv : work) sum += iv.value;
  res.value = sum;
  return res;
}

/// Same, but throws when the tolerance cannot be met.
template <class Func>
double integrate_gk_checked(const Func& f, double a, double b, double abs_tol) {
  QuadResult r = integrate_gk(f, a, b, abs_tol);
  if (!r.converged) {
    throw std::runtime_error("quadrature failed to converge: error " +
                             std::to_string(r.abs_error) + " after " +
                             std::to_string(r.evaluations) + " evaluations on [" +
                             std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return r.value;
}

}  // namespace ppd
