#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ppd/glm.hpp"
#include "ppd/model.hpp"
#include "ppd/rng.hpp"

namespace ppd {

/// Grid of candidate a0 vectors: M rows, one column per historical set.
/// Entries live in (0,1] and are kept away from zero, where the
/// normalizing constant degenerates.
struct A0Grid {
  Eigen::MatrixXd values;
};

ValidationReport validate_a0_grid(const A0Grid& grid);

/// Fitted polynomial approximation of the log normalizing constant
/// d = f(a0).  Coefficients follow the total-degree monomial basis
/// enumerated by total_degree_exponents(K, degree).
struct NormConstSurface {
  Eigen::VectorXd coefficients;
  int degree = 0;
  double r_squared = 0.0;
  Eigen::VectorXd hull_min;
  Eigen::VectorXd hull_max;
  std::string fingerprint;  // endpoint + historical data hash; empty = unchecked
};

/// Exponent tuples of the full total-degree basis in k variables, all cross
/// terms included; size is C(k + degree, degree).
std::vector<std::vector<int>> total_degree_exponents(int k_vars, int degree);

/// Partition-weighted-kernel estimate of log integral exp(log_kernel) from
/// posterior draws (rows).  Draws are standardized by their sample mean and
/// covariance Cholesky factor; the working space is the ball holding the
/// central 99% of standardized radii, split into `rings` equal-width
/// shells; each shell's representative kernel value is the maximum over its
/// member samples.
double pwk_log_c(const Eigen::MatrixXd& samples,
                 const std::function<double(const Eigen::VectorXd&)>& log_kernel, int rings = 20);

struct SurfaceFitOptions {
  long nMC = 10000;
  long nBI = 250;
  std::vector<SliceConfig> beta_slice;
  int rings = 20;
  int max_degree = 10;
  int workers = 1;
};

/// Polynomial regression d ~ poly(a0) of increasing total degree.  The fit
/// must reach R^2 > 0.99; the degree keeps rising until the largest
/// absolute residual also drops below residual_tol (or the degree and row
/// budgets run out), since on steep log-c curves R^2 alone saturates long
/// before the surface is accurate pointwise.  A constant response counts
/// as R^2 = 1.
NormConstSurface fit_polynomial_surface(const Eigen::MatrixXd& grid, const Eigen::VectorXd& d,
                                        int max_degree = 10, double residual_tol = 0.05);

/// The 5-step surface build: for each grid row, sample the power prior at
/// those a0 weights on the historical data alone, estimate the log
/// normalizing constant with PWK, then fit polynomials of increasing total
/// degree until R^2 exceeds 0.99.
NormConstSurface fit_surface(const A0Grid& grid, const EndpointSpec& endpoint,
                             const std::vector<HistoricalSet>& historical,
                             const SurfaceFitOptions& opts, RngStream& rng);

/// Deterministic evaluation of the fitted polynomial.  a0 must lie inside
/// the grid hull.
double eval_surface(const NormConstSurface& surface, const Eigen::VectorXd& a0);

/// Hash of the endpoint and historical data, used to pair a cached surface
/// with the configuration it was fitted for.
std::string historical_fingerprint(const EndpointSpec& endpoint,
                                   const std::vector<HistoricalSet>& historical);

}  // namespace ppd
