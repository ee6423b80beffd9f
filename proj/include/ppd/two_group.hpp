#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "ppd/model.hpp"
#include "ppd/rng.hpp"
#include "ppd/samplers.hpp"

namespace ppd {

/// Exact posterior family for the non-normal conjugate cases.
/// Beta: shape1/shape2 are the usual beta shapes.
/// Gamma: shape1 is the shape, shape2 the rate.
struct ConjugateForm {
  enum class Kind { Beta, Gamma };
  Kind kind = Kind::Beta;
  double shape1 = 1.0;
  double shape2 = 1.0;

  double mean() const;
  double variance() const;
};

/// Posterior sample for the control parameter of a two-group model.
struct TwoGroupPosterior {
  std::vector<double> mu_c_draws;
  /// Normal family only.  Fixed a0: column 0 is tau_c, columns 1..K the
  /// per-historical precisions.  Random a0: a single shared tau_c column.
  Eigen::MatrixXd tau_draws;
  /// Random-a0 case: K columns of a0 draws.
  Eigen::MatrixXd a0_draws;
  /// Set for non-normal fixed-a0 fits, where the posterior is known exactly.
  std::optional<ConjugateForm> conjugate;
};

/// Closed-form power-prior posterior of mu_c for Bernoulli/binomial,
/// Poisson and exponential endpoints.  a0 runs parallel to historical.
ConjugateForm conjugate_control_posterior(Family f, const TwoGroupSummary& current,
                                          std::span<const HistoricalSet> historical,
                                          std::span<const double> a0, const PriorSpec& prior);

/// Conjugate posterior of mu_t (no historical borrowing on treatment).
ConjugateForm conjugate_treatment_posterior(Family f, const TwoGroupSummary& treatment,
                                            const PriorSpec& prior);

/// Posterior of (mu_c, precisions) under the power prior with fixed a0
/// weights taken from the historical sets.  Non-normal families draw i.i.d.
/// from the exact conjugate posterior; the normal family runs a Gibbs
/// sweep over (mu_c, tau_c, tau_c01..tau_c0K).
TwoGroupPosterior fit_two_group_fixed_a0(const EndpointSpec& endpoint,
                                         const TwoGroupSummary& current,
                                         const std::vector<HistoricalSet>& historical,
                                         const PriorSpec& prior, long nMC, long nBI,
                                         RngStream& rng);

/// Posterior under the normalized power prior with beta-distributed a0.
/// Each a0k is slice-updated on its marginal log density (mu_c integrated
/// out analytically); mu_c is then redrawn from its conditional.  The
/// normal family shares one precision across current and historical data.
TwoGroupPosterior fit_two_group_random_a0(const EndpointSpec& endpoint,
                                          const TwoGroupSummary& current,
                                          const std::vector<HistoricalSet>& historical,
                                          const PriorSpec& prior,
                                          std::span<const SliceConfig> a0_slice, long nMC,
                                          long nBI, RngStream& rng);

/// Posterior probability of the alternative: P(mu_t - mu_c < delta), or
/// P(mu_t / mu_c < delta) for exponential hazards.  When the control
/// posterior is conjugate the probability is computed by adaptive
/// Gauss-Kronrod integration (absolute tolerance 1e-6); otherwise the
/// treatment CDF is averaged over the control draws.
double reject_probability(const EndpointSpec& endpoint, const TwoGroupPosterior& control,
                          const TwoGroupSummary& treatment, const PriorSpec& prior, double delta,
                          RngStream& rng);

}  // namespace ppd
