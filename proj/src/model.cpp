#include "ppd/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ppd {

const char* family_name(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::Bernoulli: return "bernoulli";
    case Family::Binomial: return "binomial";
    case Family::Poisson: return "poisson";
    case Family::Exponential: return "exponential";
  }
  return "?";
}

const char* link_name(Link l) {
  switch (l) {
    case Link::Identity: return "identity";
    case Link::Logit: return "logit";
    case Link::Probit: return "probit";
    case Link::Log: return "log";
    case Link::IdentityPositive: return "identity-positive";
    case Link::IdentityProbability: return "identity-probability";
    case Link::CLogLog: return "cloglog";
  }
  return "?";
}

std::optional<Family> family_from_name(const std::string& s) {
  for (Family f : {Family::Normal, Family::Bernoulli, Family::Binomial, Family::Poisson,
                   Family::Exponential}) {
    if (s == family_name(f)) return f;
  }
  return std::nullopt;
}

std::optional<Link> link_from_name(const std::string& s) {
  for (Link l : {Link::Identity, Link::Logit, Link::Probit, Link::Log, Link::IdentityPositive,
                 Link::IdentityProbability, Link::CLogLog}) {
    if (s == link_name(l)) return l;
  }
  return std::nullopt;
}

Link canonical_link(Family f) {
  switch (f) {
    case Family::Normal: return Link::Identity;
    case Family::Bernoulli:
    case Family::Binomial: return Link::Logit;
    case Family::Poisson:
    case Family::Exponential: return Link::Log;
  }
  return Link::Identity;
}

bool link_allowed(Family f, Link l) {
  switch (f) {
    case Family::Normal:
      return l == Link::Identity;
    case Family::Bernoulli:
    case Family::Binomial:
      return l == Link::Logit || l == Link::Probit || l == Link::IdentityProbability ||
             l == Link::CLogLog;
    case Family::Poisson:
    case Family::Exponential:
      return l == Link::Log || l == Link::IdentityPositive;
  }
  return false;
}

double link_eval(Link l, double eta) {
  switch (l) {
    case Link::Identity:
      return eta;
    case Link::Logit:
      return 1.0 / (1.0 + std::exp(-eta));
    case Link::Probit:
      return 0.5 * std::erfc(-eta / std::sqrt(2.0));
    case Link::Log:
      return std::exp(eta);
    case Link::IdentityPositive:
      if (eta <= 0.0) {
        throw std::domain_error("identity-positive link: linear predictor " +
                                std::to_string(eta) + " outside (0, inf)");
      }
      return eta;
    case Link::IdentityProbability:
      if (eta <= 0.0 || eta >= 1.0) {
        throw std::domain_error("identity-probability link: linear predictor " +
                                std::to_string(eta) + " outside (0, 1)");
      }
      return eta;
    case Link::CLogLog:
      return -std::expm1(-std::exp(eta));
  }
  return eta;
}

bool link_inverse_domain_check(Link l, double value) {
  if (!std::isfinite(value)) return false;
  switch (l) {
    case Link::IdentityPositive:
      return value > 0.0;
    case Link::IdentityProbability:
      return value > 0.0 && value < 1.0;
    case Link::Logit:
    case Link::Probit:
    case Link::CLogLog:
      return value > 0.0 && value < 1.0;
    case Link::Log:
      return value > 0.0;
    case Link::Identity:
      return true;
  }
  return true;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (i) os << "; ";
    os << report[i].path << ": " << report[i].message;
  }
  return os.str();
}

namespace {

bool is_integral_value(double x) { return std::isfinite(x) && x == std::floor(x); }

void add(ValidationReport& out, std::string path, std::string message) {
  out.push_back({std::move(path), std::move(message)});
}

}  // namespace

void validate_endpoint(const EndpointSpec& e, const std::string& path, ValidationReport& out) {
  if (!link_allowed(e.family, e.link)) {
    add(out, path + ".link",
        std::string("link '") + link_name(e.link) + "' not supported for family '" +
            family_name(e.family) + "'");
  }
}

void validate_summary(Family f, const TwoGroupSummary& s, const std::string& path,
                      ValidationReport& out) {
  if (s.n < 0) add(out, path + ".n", "sample size must be nonnegative");
  switch (f) {
    case Family::Bernoulli:
    case Family::Binomial:
      if (!is_integral_value(s.y_sum)) add(out, path + ".y_sum", "must be integral");
      if (s.y_sum < 0 || s.y_sum > static_cast<double>(s.n))
        add(out, path + ".y_sum", "must satisfy 0 <= y_sum <= n");
      break;
    case Family::Poisson:
      if (!is_integral_value(s.y_sum) || s.y_sum < 0)
        add(out, path + ".y_sum", "must be a nonnegative integer");
      break;
    case Family::Exponential:
      if (!(s.y_sum > 0) && s.n > 0) add(out, path + ".y_sum", "must be positive");
      break;
    case Family::Normal:
      break;
  }
  if (f == Family::Normal) {
    if (s.n > 0 && !s.v) add(out, path + ".v", "variance required for normal family");
    if (s.v && !(*s.v > 0)) add(out, path + ".v", "variance must be positive");
  } else if (s.v) {
    add(out, path + ".v", "variance only applies to the normal family");
  }
}

void validate_glm_data(Family f, const GlmData& d, bool has_treatment, const std::string& path,
                       ValidationReport& out) {
  if (d.X.rows() != d.y.size())
    add(out, path, "covariate row count does not match response length");
  if (f == Family::Binomial) {
    if (!d.trials) {
      add(out, path + ".trials", "trials vector required for binomial family");
    } else {
      if (d.trials->size() != d.y.size())
        add(out, path + ".trials", "trials length does not match response length");
      for (Eigen::Index i = 0; i < d.trials->size() && i < d.y.size(); ++i) {
        if (!((*d.trials)[i] >= 1) || !is_integral_value((*d.trials)[i]))
          add(out, path + ".trials", "entries must be positive integers (row " +
                                         std::to_string(i + 1) + ")");
        else if (d.y[i] < 0 || d.y[i] > (*d.trials)[i])
          add(out, path + ".y", "0 <= y <= trials violated at row " + std::to_string(i + 1));
      }
    }
  } else if (d.trials) {
    add(out, path + ".trials", "trials only applies to the binomial family");
  }
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
    if (d.X.rows() > 0 && d.X.col(j).cwiseAbs().maxCoeff() == 0.0)
      add(out, path + ".X", "column " + std::to_string(j + 1) + " is constant zero");
  }
  if (has_treatment && d.X.cols() >= 1) {
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
      double t = d.X(i, 0);
      if (t != 0.0 && t != 1.0) {
        add(out, path + ".X", "treatment indicator (column 1) must be 0/1");
        break;
      }
    }
  }
}

void validate_historical(const EndpointSpec& e, const std::vector<HistoricalSet>& hist,
                         bool a0_required, ValidationReport& out) {
  Eigen::Index glm_cols = -1;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    std::string path = "historical[" + std::to_string(k) + "]";
    const HistoricalSet& h = hist[k];
    if (h.a0) {
      if (!(*h.a0 >= 0.0 && *h.a0 <= 1.0)) add(out, path + ".a0", "a0 out of [0,1]");
    } else if (a0_required) {
      add(out, path + ".a0", "fixed-a0 workflow requires an a0 weight");
    }
    if (h.is_two_group()) {
      validate_summary(e.family, h.two_group(), path, out);
      if (h.two_group().n <= 0) add(out, path + ".n", "historical dataset is empty");
    } else {
      validate_glm_data(e.family, h.glm(), /*has_treatment=*/false, path, out);
      if (glm_cols < 0) {
        glm_cols = h.glm().X.cols();
      } else if (h.glm().X.cols() != glm_cols) {
        add(out, path + ".X", "covariate column count differs between historical sets");
      }
    }
  }
}

void validate_prior(const PriorSpec& p, const std::string& path, ValidationReport& out) {
  auto check = [&](double v, const char* name) {
    if (!(v > 0.0)) add(out, path + "." + name, "hyperparameter must be strictly positive");
  };
  check(p.mu_t_shape1, "mu_t_shape1");
  check(p.mu_t_shape2, "mu_t_shape2");
  check(p.mu_c_shape1, "mu_c_shape1");
  check(p.mu_c_shape2, "mu_c_shape2");
  check(p.a0_shape1, "a0_shape1");
  check(p.a0_shape2, "a0_shape2");
}

void validate_design_spec(const DesignSpec& d, const std::string& path, ValidationReport& out) {
  if (!(d.gamma > 0.0 && d.gamma < 1.0)) add(out, path + ".gamma", "gamma in (0,1)");
  if (d.N < 1) add(out, path + ".N", "trial count must be at least 1");
  if (!(d.nMC > d.nBI)) add(out, path + ".nMC", "nMC must exceed nBI");
  if (d.nBI < 0) add(out, path + ".nBI", "burn-in must be nonnegative");
}

void validate_sampling_prior(const SamplingPrior& s, Family f, Eigen::Index expected_cols,
                             const std::string& path, ValidationReport& out) {
  if (s.draws.rows() < 1) add(out, path, "sampling prior needs at least one atom");
  if (expected_cols > 0 && s.draws.cols() != expected_cols)
    add(out, path, "atom dimension " + std::to_string(s.draws.cols()) + " does not match model (" +
                       std::to_string(expected_cols) + ")");
  if (f == Family::Normal) {
    if (s.variance_draws.empty()) add(out, path + ".variance", "normal endpoints need variance atoms");
    for (double v : s.variance_draws) {
      if (!(v > 0.0)) {
        add(out, path + ".variance", "variance atoms must be positive");
        break;
      }
    }
  }
}

ValidationReport validate_design_inputs(const EndpointSpec& endpoint,
                                        const std::vector<HistoricalSet>& historical,
                                        const PriorSpec& prior, const DesignSpec& design) {
  ValidationReport out;
  validate_endpoint(endpoint, "endpoint", out);
  validate_historical(endpoint, historical, /*a0_required=*/false, out);
  validate_prior(prior, "prior", out);
  validate_design_spec(design, "design", out);
  return out;
}

}  // namespace ppd
