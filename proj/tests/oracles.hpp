#pragma once

// Test-only oracles, independent of the library's estimation paths: plain
// trapezoid grids over unnormalized kernels, brute-force Monte Carlo, and
// batch-means MC standard errors.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ppd/model.hpp"

namespace oracle {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Batch-means Monte Carlo standard error of the chain mean (50 batches),
/// which accounts for autocorrelation.
inline double mcse(const std::vector<double>& chain, int batches = 50) {
  const std::size_t n = chain.size();
  const std::size_t len = n / static_cast<std::size_t>(batches);
  std::vector<double> bm;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += chain[b * len + i];
    bm.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(var_of(bm) / static_cast<double>(batches));
}

/// Kolmogorov-Smirnov statistic of draws against a reference CDF.
inline double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double F = cdf(draws[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

/// Two-group log likelihood of mu from summary statistics (non-normal).
inline double two_group_loglik(ppd::Family f, double y_sum, double n, double mu) {
  switch (f) {
    case ppd::Family::Bernoulli:
    case ppd::Family::Binomial:
      return y_sum * std::log(mu) + (n - y_sum) * std::log1p(-mu);
    case ppd::Family::Poisson:
      return y_sum * std::log(mu) - n * mu;
    case ppd::Family::Exponential:
      return n * std::log(mu) - y_sum * mu;
    default:
      return 0.0;
  }
}

struct RandomA0Moments {
  double mean_mu = 0.0;
  double mean_a0 = 0.0;
};

/// Dense-grid quadrature over (mu, a0) of the K=1 normalized-power-prior
/// posterior, built from raw kernels only.  The conditional normalizer
/// c(a0) is itself computed by the trapezoid rule, column by column.
inline RandomA0Moments two_group_random_a0_grid(ppd::Family f, double y0, double n0, double yc,
                                                double nc, const ppd::PriorSpec& prior,
                                                double mu_lo, double mu_hi, int n_mu = 1500,
                                                int n_a = 400, double a_lo = 0.0,
                                                double a_hi = 1.0) {
  std::vector<double> mu(n_mu), wmu(n_mu);
  for (int i = 0; i < n_mu; ++i) {
    mu[i] = mu_lo + (mu_hi - mu_lo) * i / (n_mu - 1);
    wmu[i] = (i == 0 || i == n_mu - 1) ? 0.5 : 1.0;
  }
  auto log_prior_mu = [&](double m) {
    if (f == ppd::Family::Bernoulli || f == ppd::Family::Binomial)
      return (prior.mu_c_shape1 - 1.0) * std::log(m) + (prior.mu_c_shape2 - 1.0) * std::log1p(-m);
    return (prior.mu_c_shape1 - 1.0) * std::log(m) - prior.mu_c_shape2 * m;
  };
  std::vector<double> l0(n_mu), lc(n_mu), lpm(n_mu);
  for (int i = 0; i < n_mu; ++i) {
    l0[i] = two_group_loglik(f, y0, n0, mu[i]);
    lc[i] = two_group_loglik(f, yc, nc, mu[i]);
    lpm[i] = log_prior_mu(mu[i]);
  }

  double sw = 0.0, s_mu = 0.0, s_a = 0.0;
  double global_shift = 0.0;
  bool first = true;
  std::vector<double> col(n_mu);
  for (int j = 0; j < n_a; ++j) {
    double a = a_lo + (a_hi - a_lo) * (j + 0.5) / n_a;
    double wa = 1.0;
    double m_col = -1e308;
    for (int i = 0; i < n_mu; ++i) {
      col[i] = a * l0[i] + lpm[i];
      m_col = std::max(m_col, col[i]);
    }
    double c_tilde = 0.0;
    for (int i = 0; i < n_mu; ++i) c_tilde += wmu[i] * std::exp(col[i] - m_col);
    double log_c = m_col + std::log(c_tilde);
    double log_prior_a =
        (prior.a0_shape1 - 1.0) * std::log(a) + (prior.a0_shape2 - 1.0) * std::log1p(-a);
    for (int i = 0; i < n_mu; ++i) {
      double t = lc[i] + col[i] - log_c + log_prior_a;
      if (first) {
        global_shift = t;
        first = false;
      }
      double w = wmu[i] * wa * std::exp(t - global_shift);
      sw += w;
      s_mu += w * mu[i];
      s_a += w * a;
    }
  }
  return {s_mu / sw, s_a / sw};
}

/// Same idea for the intercept-only logistic power prior on the beta scale
/// (flat initial prior on beta0), optionally with current data.
inline RandomA0Moments glm_logistic_intercept_grid(double y0, double n0, double yc, double nc,
                                                   double a0_shape1, double a0_shape2,
                                                   double b_lo, double b_hi, double a_lo,
                                                   double a_hi, int n_b = 2000, int n_a = 400) {
  auto loglik = [](double y, double n, double b) {
    double sp = b > 30 ? b : std::log1p(std::exp(b));
    return y * b - n * sp;
  };
  std::vector<double> beta(n_b), wb(n_b), l0(n_b), lc(n_b);
  for (int i = 0; i < n_b; ++i) {
    beta[i] = b_lo + (b_hi - b_lo) * i / (n_b - 1);
    wb[i] = (i == 0 || i == n_b - 1) ? 0.5 : 1.0;
    l0[i] = loglik(y0, n0, beta[i]);
    lc[i] = nc > 0 ? loglik(yc, nc, beta[i]) : 0.0;
  }
  double sw = 0.0, s_b = 0.0, s_a = 0.0, shift = 0.0;
  bool first = true;
  for (int j = 0; j < n_a; ++j) {
    double a = a_lo + (a_hi - a_lo) * (j + 0.5) / n_a;
    double m_col = -1e308;
    std::vector<double> col(n_b);
    for (int i = 0; i < n_b; ++i) {
      col[i] = a * l0[i];
      m_col = std::max(m_col, col[i]);
    }
    double c_tilde = 0.0;
    for (int i = 0; i < n_b; ++i) c_tilde += wb[i] * std::exp(col[i] - m_col);
    double log_c = m_col + std::log(c_tilde);
    double log_prior_a = (a0_shape1 - 1.0) * std::log(a) + (a0_shape2 - 1.0) * std::log1p(-a);
    for (int i = 0; i < n_b; ++i) {
      double t = lc[i] + col[i] - log_c + log_prior_a;
      if (first) {
        shift = t;
        first = false;
      }
      double w = wb[i] * std::exp(t - shift);
      sw += w;
      s_b += w * beta[i];
      s_a += w * a;
    }
  }
  return {s_b / sw, s_a / sw};
}

}  // namespace oracle
