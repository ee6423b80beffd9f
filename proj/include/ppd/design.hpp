#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "ppd/glm.hpp"
#include "ppd/model.hpp"
#include "ppd/norm_const.hpp"
#include "ppd/two_group.hpp"

namespace ppd {

enum class A0Mode { Fixed, Random };
enum class ModelKind { TwoGroup, Glm };
enum class EstimationMethod { NumericalIntegration, Gibbs, Slice, GibbsSlice, SlicePwk };

/// Sampling machinery used for each family/model/a0-mode cell.
EstimationMethod estimation_method(Family f, ModelKind m, A0Mode a);

/// Monte Carlo estimate of a Bayesian operating characteristic.  Whether it
/// is power or type I error depends only on where the sampling prior puts
/// its mass.
struct OperatingCharacteristic {
  double estimate = 0.0;
  double mc_stderr = 0.0;
  long rejections = 0;
  long trials = 0;
  std::vector<double> average_posterior_means;  // GLM runs
  long excluded = 0;                            // approximation path only
};

/// Called after every finished trial; must be safe to invoke concurrently.
using ProgressFn = std::function<void(long done, long total)>;

struct TwoGroupDesign {
  EndpointSpec endpoint;
  DesignSpec design;
  std::vector<HistoricalSet> historical;
  PriorSpec prior;
  SamplingPrior samp_t;
  SamplingPrior samp_c;
  A0Mode a0_mode = A0Mode::Fixed;
  std::vector<SliceConfig> a0_slice;
};

/// Simulates N two-group trials: draw parameters from the sampling priors,
/// generate group data, fit the control posterior with the configured
/// power prior, and count trials whose posterior probability of the
/// alternative reaches gamma.  Trial b uses RngStream(seed, b), so results
/// do not depend on the worker count.
OperatingCharacteristic power_two_group(const TwoGroupDesign& d, std::uint64_t seed,
                                        int workers = 1, const ProgressFn& progress = {});

struct GlmDesign {
  EndpointSpec endpoint;
  DesignSpec design;
  std::vector<HistoricalSet> historical;     // borrowing + covariate source
  std::optional<Eigen::MatrixXd> x_samples;  // covariate source when no historical
  SamplingPrior samp_beta;
  PriorSpec prior;
  A0Mode a0_mode = A0Mode::Fixed;
  std::optional<NormConstSurface> surface;  // random-a0 non-normal only
  std::vector<SliceConfig> beta_slice;
  std::vector<SliceConfig> a0_slice;
  double treatment_allocation = 0.5;
};

/// GLM design simulation: covariate rows are resampled from the historical
/// covariates (or x_samples), the treatment column is randomized
/// Bernoulli(treatment_allocation), responses are generated through the
/// link, and each trial is fit by the GLM engine.  Rejects when
/// P(beta_1 < delta | data) >= gamma.
OperatingCharacteristic power_glm(const GlmDesign& d, std::uint64_t seed, int workers = 1,
                                  const ProgressFn& progress = {});

/// Asymptotic replacement for power_glm with fixed a0 and canonical links:
/// the posterior of beta_1 is approximated by a normal centered at the
/// kernel mode with the inverse observed information (exact Student-t rule
/// for the normal family).  Non-converged trials are excluded and
/// reported; more than 5% exclusions is an error.
OperatingCharacteristic power_glm_approx(const GlmDesign& d, std::uint64_t seed, int workers = 1,
                                         const ProgressFn& progress = {});

struct SampleSizeRow {
  long n = 0;
  double type1_error = 0.0;
  double power = 0.0;
};

struct SampleSizeResult {
  std::vector<SampleSizeRow> table;
  std::optional<long> n_alpha0;  // smallest n with type I error <= alpha0
  std::optional<long> n_alpha1;  // smallest n with power >= 1 - alpha1
  std::optional<long> n_final;   // max of the two when both exist
};

/// Evaluates type I error (null_mass = true) and power along the sample
/// size grid and applies the max{n_alpha0, n_alpha1} rule.  Unsatisfiable
/// constraints leave the corresponding field unset.
SampleSizeResult find_sample_size(const std::function<double(long n, bool null_mass)>& evaluate,
                                  double alpha0, double alpha1,
                                  const std::vector<long>& n_grid);

}  // namespace ppd
