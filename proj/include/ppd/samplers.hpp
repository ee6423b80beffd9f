#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "ppd/model.hpp"
#include "ppd/rng.hpp"

namespace ppd {

/// Tuning for one univariate slice-sampled coordinate.
struct SliceConfig {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double width = 1.0;
};

/// Defaults for a0 coordinates: bounded to (0,1), width 0.1.
inline SliceConfig a0_slice_defaults() { return SliceConfig{0.0, 1.0, 0.1}; }

/// Defaults for regression coefficients: bounded stepping-out on
/// (-100, 100) of the linear-predictor scale, width 1.
inline SliceConfig beta_slice_defaults() { return SliceConfig{-100.0, 100.0, 1.0}; }

inline constexpr int kSliceMaxShrink = 10000;

/// One update of Neal's slice sampler with stepping-out and shrinkage,
/// truncated at the configured bounds.  If x0 is distributed per the target
/// the return value is too.  NaN from log_density at a candidate point is
/// treated as log zero; NaN at x0 itself is an error.
template <class LogDensity>
double slice_step(LogDensity&& log_density, double x0, const SliceConfig& cfg, RngStream& rng) {
  if (!(cfg.lower < cfg.upper) || !(cfg.width > 0.0))
    throw std::invalid_argument("slice config requires lower < upper and width > 0");
  if (!(x0 > cfg.lower && x0 < cfg.upper))
    throw std::invalid_argument("slice sampler: start point outside (lower, upper)");
  const double gx0 = log_density(x0);
  if (std::isnan(gx0) || gx0 == std::numeric_limits<double>::infinity() ||
      gx0 == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("slice sampler: invalid initial point");

  // Slice level, in log terms.
  const double logy = gx0 - rng.exponential(1.0);

  // Initial interval around x0, then step out until both ends leave the
  // slice or hit the bounds.
  double u = rng.uniform(0.0, cfg.width);
  double L = x0 - u;
  double R = x0 + (cfg.width - u);
  while (L > cfg.lower && log_density(L) > logy) L -= cfg.width;
  while (R < cfg.upper && log_density(R) > logy) R += cfg.width;
  if (L < cfg.lower) L = cfg.lower;
  if (R > cfg.upper) R = cfg.upper;

  // Sample from the interval, shrinking on each rejection.
  for (int it = 0; it < kSliceMaxShrink; ++it) {
    double x1 = rng.uniform(L, R);
    double gx1 = log_density(x1);
    if (gx1 >= logy) return x1;  // NaN compares false, i.e. rejected
    if (x1 > x0)
      R = x1;
    else
      L = x1;
  }
  throw std::runtime_error("slice sampler stalled");
}

/// One normal-likelihood contribution to the conditional of a flat-prior
/// location parameter: n observations with the given sample mean, known
/// precision, and power-prior weight (1 for current data, a0k otherwise).
struct NormalMeanTerm {
  double n = 0.0;
  double mean = 0.0;
  double precision = 1.0;
  double weight = 1.0;
};

/// Draw from the conditional posterior of a shared normal mean under the
/// flat location prior: Normal(weighted mean, 1 / total weighted precision).
double gibbs_normal_mean(std::span<const NormalMeanTerm> terms, flat_location_t, RngStream& rng);

/// Draw from the conditional posterior of a normal precision under the
/// Jeffreys prior: Gamma(weighted_n / 2, weighted_rss / 2).
double gibbs_normal_precision(double weighted_n, double weighted_rss, jeffreys_precision_t,
                              RngStream& rng);

}  // namespace ppd
