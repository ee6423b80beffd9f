#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ppd {

enum class Family { Normal, Bernoulli, Binomial, Poisson, Exponential };

enum class Link {
  Identity,
  Logit,
  Probit,
  Log,
  IdentityPositive,
  IdentityProbability,
  CLogLog,
};

const char* family_name(Family f);
const char* link_name(Link l);
std::optional<Family> family_from_name(const std::string& s);
std::optional<Link> link_from_name(const std::string& s);

/// Endpoint family plus link function (the link matters for GLMs only).
struct EndpointSpec {
  Family family = Family::Normal;
  Link link = Link::Identity;
};

/// Canonical link per family: logit for Bernoulli/binomial, identity for
/// normal, log for Poisson and exponential.
Link canonical_link(Family f);

/// True if the family/link pairing is supported.
bool link_allowed(Family f, Link l);

/// Inverse link: maps the linear predictor eta to the mean scale.
/// Throws std::domain_error for identity-positive / identity-probability
/// links when eta lands outside the family support.
double link_eval(Link l, double eta);

/// True if a mean-scale value is inside the support implied by the link.
bool link_inverse_domain_check(Link l, double value);

/// Sufficient statistics for one arm of a two-group model.  The sample
/// variance v is carried for the normal family only.
struct TwoGroupSummary {
  double y_sum = 0.0;
  long n = 0;
  std::optional<double> v;
};

/// Subject-level GLM data.  For current datasets the first column of X is
/// the treatment indicator; historical control datasets omit it.  The
/// trials vector is present only for the collapsed binomial representation
/// (Bernoulli is the trials-all-one special case).
struct GlmData {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::optional<Eigen::VectorXd> trials;
};

/// One historical dataset with an optional fixed discounting weight a0
/// (present in fixed-a0 workflows only).
struct HistoricalSet {
  std::variant<TwoGroupSummary, GlmData> payload;
  std::optional<double> a0;

  bool is_two_group() const { return payload.index() == 0; }
  const TwoGroupSummary& two_group() const { return std::get<TwoGroupSummary>(payload); }
  const GlmData& glm() const { return std::get<GlmData>(payload); }
};

/// Hyperparameters of the proper initial priors: beta for Bernoulli means,
/// gamma (shape/rate) for Poisson and exponential means, and the beta prior
/// on each a0k when a0 is modeled as random.  Improper priors (flat
/// location, Jeffreys precision) are distinguished tags, not limits of
/// these; see flat_location_t / jeffreys_precision_t.
struct PriorSpec {
  double mu_t_shape1 = 1.0;
  double mu_t_shape2 = 1.0;
  double mu_c_shape1 = 1.0;
  double mu_c_shape2 = 1.0;
  double a0_shape1 = 1.0;
  double a0_shape2 = 1.0;
};

struct flat_location_t {};
struct jeffreys_precision_t {};
inline constexpr flat_location_t flat_location{};
inline constexpr jeffreys_precision_t jeffreys_precision{};

/// Trial-design settings: null boundary delta, rejection threshold gamma,
/// number of simulated trials N, group sizes (two-group) or total size
/// (GLM), and MCMC lengths.
struct DesignSpec {
  double delta = 0.0;
  double gamma = 0.95;
  long N = 1;
  long n_t = 0;
  long n_c = 0;
  long data_size = 0;
  long nMC = 10000;
  long nBI = 250;
};

/// Discrete approximation of a sampling prior: each row of draws is one
/// atom (one column for two-group means, full coefficient vectors for
/// GLMs).  variance_draws carries tau^-1 atoms for normal endpoints.
struct SamplingPrior {
  Eigen::MatrixXd draws;
  std::vector<double> variance_draws;
};

struct Violation {
  std::string path;
  std::string message;
};
using ValidationReport = std::vector<Violation>;

std::string format_report(const ValidationReport& report);

/// Per-type checks used by validate_design_inputs and the io layer.  Each
/// appends violations keyed by `path` and never throws.
void validate_endpoint(const EndpointSpec& e, const std::string& path, ValidationReport& out);
void validate_summary(Family f, const TwoGroupSummary& s, const std::string& path,
                      ValidationReport& out);
void validate_glm_data(Family f, const GlmData& d, bool has_treatment, const std::string& path,
                       ValidationReport& out);
void validate_historical(const EndpointSpec& e, const std::vector<HistoricalSet>& hist,
                         bool a0_required, ValidationReport& out);
void validate_prior(const PriorSpec& p, const std::string& path, ValidationReport& out);
void validate_design_spec(const DesignSpec& d, const std::string& path, ValidationReport& out);
void validate_sampling_prior(const SamplingPrior& s, Family f, Eigen::Index expected_cols,
                             const std::string& path, ValidationReport& out);

/// Full cross-field validation of a design-run input set.  Violations are
/// data, not failures: an empty report means valid.
ValidationReport validate_design_inputs(const EndpointSpec& endpoint,
                                        const std::vector<HistoricalSet>& historical,
                                        const PriorSpec& prior, const DesignSpec& design);

}  // namespace ppd
