#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ppd/model.hpp"
#include "ppd/rng.hpp"
#include "ppd/samplers.hpp"

namespace ppd {

struct NormConstSurface;

/// Posterior sample of GLM regression coefficients.  Column 1 of
/// beta_draws is the intercept and column 2 the treatment coefficient
/// (historical-only fits have no treatment column and put covariates right
/// after the intercept).  tau_draws is filled for the normal family only:
/// fixed a0 carries [tau, tau_1..tau_K], random a0 a single shared tau.
struct GlmPosterior {
  Eigen::MatrixXd beta_draws;
  Eigen::MatrixXd tau_draws;
  Eigen::MatrixXd a0_draws;
};

struct GlmOptions {
  long nMC = 10000;
  long nBI = 250;
  std::vector<SliceConfig> beta_slice;  // padded with beta_slice_defaults()
  std::vector<SliceConfig> a0_slice;    // padded with a0_slice_defaults()
  bool include_current = true;
  /// Overrides the a0 weights stored on the historical sets (used by the
  /// normalizing-constant grid sweep).
  std::optional<Eigen::VectorXd> a0_override;
  std::optional<Eigen::VectorXd> init_beta;
};

/// Log of the unnormalized power-prior kernel at fixed a0: current-data
/// log likelihood (if given) plus the a0-weighted historical log
/// likelihoods, under the flat initial prior on the coefficients.
/// Additive constants (binomial coefficients, factorials) are dropped.
/// Returns -inf when a link domain constraint is violated.  Non-normal
/// families only.
class GlmKernel {
 public:
  GlmKernel(const EndpointSpec& endpoint, const GlmData* current,
            std::span<const HistoricalSet> historical, Eigen::VectorXd a0, bool include_current);
  ~GlmKernel();
  GlmKernel(GlmKernel&&) noexcept;

  double operator()(const Eigen::VectorXd& beta) const;
  Eigen::Index dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot kernel evaluation (builds the evaluator and discards it).
double glm_log_kernel_fixed_a0(const EndpointSpec& endpoint, const Eigen::VectorXd& beta,
                               const GlmData* current, std::span<const HistoricalSet> historical,
                               const Eigen::VectorXd& a0);

/// Power-prior GLM fit with fixed a0.  Non-normal families run a
/// coordinate-wise slice sweep over the coefficients; the normal family
/// runs Gibbs over (beta, tau, tau_1..tau_K) with unshared historical
/// precisions.  With include_current=false the fit draws from the power
/// prior itself (the sampling-prior generator workflow) and the
/// coefficient vector has no treatment entry.
GlmPosterior fit_glm_fixed_a0(const EndpointSpec& endpoint, const GlmData* current,
                              std::span<const HistoricalSet> historical, const GlmOptions& opts,
                              RngStream& rng);

/// Normalized-power-prior GLM fit with random a0.  Non-normal families
/// need a fitted log-normalizing-constant surface; the a0 slice bounds are
/// clamped to the surface grid hull.  The normal family uses the analytic
/// log c(a0) and shares one precision across all datasets.
GlmPosterior fit_glm_random_a0(const EndpointSpec& endpoint, const GlmData* current,
                               std::span<const HistoricalSet> historical, const PriorSpec& prior,
                               const NormConstSurface* surface, const GlmOptions& opts,
                               RngStream& rng);

/// Analytic log c(a0) for the normal GLM with one shared precision, taken
/// over the historically identified coefficients (the treatment column
/// never appears in a historical likelihood, so its flat factor drops).
/// Returns +inf where the integral diverges.
double normal_glm_log_norm_const(std::span<const HistoricalSet> historical,
                                 const Eigen::VectorXd& a0);

/// Mode and curvature of the fixed-a0 kernel for canonical links, used by
/// the asymptotic design path.  cov is the inverse observed information at
/// the mode.
struct NewtonResult {
  Eigen::VectorXd mode;
  Eigen::MatrixXd cov;
  bool converged = false;
  int iterations = 0;
};
NewtonResult glm_kernel_newton(const EndpointSpec& endpoint, const GlmData* current,
                               std::span<const HistoricalSet> historical,
                               const Eigen::VectorXd& a0, int max_iter = 100);

}  // namespace ppd
