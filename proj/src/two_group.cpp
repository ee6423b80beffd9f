#include "ppd/two_group.hpp"

#include <cmath>
#include <stdexcept>

#include "ppd/dist.hpp"
#include "ppd/quadrature.hpp"

namespace ppd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Family collapse_binomial(Family f) {
  return f == Family::Binomial ? Family::Bernoulli : f;
}

double sample_mean(const TwoGroupSummary& s) {
  return s.n > 0 ? s.y_sum / static_cast<double>(s.n) : 0.0;
}

// Sum of squared deviations around mu, from sufficient statistics:
// (n-1) v + n (ybar - mu)^2.
double rss_about(const TwoGroupSummary& s, double mu) {
  double ybar = sample_mean(s);
  double v = s.v.value_or(0.0);
  return (s.n - 1) * v + s.n * (ybar - mu) * (ybar - mu);
}

std::vector<double> fixed_a0_weights(const std::vector<HistoricalSet>& historical) {
  std::vector<double> a0;
  a0.reserve(historical.size());
  for (const auto& h : historical) {
    if (!h.a0) throw std::invalid_argument("fixed-a0 fit requires a0 on every historical set");
    a0.push_back(*h.a0);
  }
  return a0;
}

ConjugateForm draw_free_conjugate(Family f, double y_sum, double n, const PriorSpec& p,
                                  bool treatment) {
  double s1 = treatment ? p.mu_t_shape1 : p.mu_c_shape1;
  double s2 = treatment ? p.mu_t_shape2 : p.mu_c_shape2;
  switch (collapse_binomial(f)) {
    case Family::Bernoulli:
      return {ConjugateForm::Kind::Beta, s1 + y_sum, s2 + (n - y_sum)};
    case Family::Poisson:
      return {ConjugateForm::Kind::Gamma, s1 + y_sum, s2 + n};
    case Family::Exponential:
      return {ConjugateForm::Kind::Gamma, s1 + n, s2 + y_sum};
    default:
      throw std::logic_error("conjugate posterior undefined for the normal family");
  }
}

}  // namespace

double ConjugateForm::mean() const {
  if (kind == Kind::Beta) return shape1 / (shape1 + shape2);
  return shape1 / shape2;
}

double ConjugateForm::variance() const {
  if (kind == Kind::Beta) {
    double s = shape1 + shape2;
    return shape1 * shape2 / (s * s * (s + 1.0));
  }
  return shape1 / (shape2 * shape2);
}

ConjugateForm conjugate_control_posterior(Family f, const TwoGroupSummary& current,
                                          std::span<const HistoricalSet> historical,
                                          std::span<const double> a0, const PriorSpec& prior) {
  if (historical.size() != a0.size())
    throw std::invalid_argument("a0 weights must run parallel to historical sets");
  double wy = current.y_sum;
  double wn = static_cast<double>(current.n);
  for (std::size_t k = 0; k < historical.size(); ++k) {
    const TwoGroupSummary& h = historical[k].two_group();
    wy += a0[k] * h.y_sum;
    wn += a0[k] * static_cast<double>(h.n);
  }
  return draw_free_conjugate(f, wy, wn, prior, /*treatment=*/false);
}

ConjugateForm conjugate_treatment_posterior(Family f, const TwoGroupSummary& treatment,
                                            const PriorSpec& prior) {
  return draw_free_conjugate(f, treatment.y_sum, static_cast<double>(treatment.n), prior,
                             /*treatment=*/true);
}

namespace {

double conjugate_draw(const ConjugateForm& c, RngStream& rng) {
  if (c.kind == ConjugateForm::Kind::Beta) return rng.beta(c.shape1, c.shape2);
  return rng.gamma(c.shape1, c.shape2);
}

TwoGroupPosterior fit_normal_fixed(const TwoGroupSummary& current,
                                   const std::vector<HistoricalSet>& historical,
                                   const std::vector<double>& a0, long nMC, long nBI,
                                   RngStream& rng) {
  const std::size_t K = historical.size();
  const long kept = nMC - nBI;
  TwoGroupPosterior post;
  post.mu_c_draws.reserve(kept);
  post.tau_draws.resize(kept, static_cast<Eigen::Index>(K) + 1);

  // Start mu at the pooled mean, precisions at 1.
  double num = current.y_sum;
  double den = static_cast<double>(current.n);
  for (std::size_t k = 0; k < K; ++k) {
    num += a0[k] * historical[k].two_group().y_sum;
    den += a0[k] * historical[k].two_group().n;
  }
  double mu = den > 0 ? num / den : 0.0;
  double tau_c = 1.0;
  std::vector<double> tau_h(K, 1.0);

  std::vector<NormalMeanTerm> terms;
  for (long it = 0; it < nMC; ++it) {
    if (current.n > 0)
      tau_c = gibbs_normal_precision(static_cast<double>(current.n), rss_about(current, mu),
                                     jeffreys_precision, rng);
    for (std::size_t k = 0; k < K; ++k) {
      const TwoGroupSummary& h = historical[k].two_group();
      double wn = a0[k] * h.n;
      if (wn > 0)
        tau_h[k] = gibbs_normal_precision(wn, a0[k] * rss_about(h, mu), jeffreys_precision, rng);
    }
    terms.clear();
    if (current.n > 0) terms.push_back({static_cast<double>(current.n), sample_mean(current), tau_c, 1.0});
    for (std::size_t k = 0; k < K; ++k) {
      const TwoGroupSummary& h = historical[k].two_group();
      terms.push_back({static_cast<double>(h.n), sample_mean(h), tau_h[k], a0[k]});
    }
    mu = gibbs_normal_mean(terms, flat_location, rng);

    if (it >= nBI) {
      long row = it - nBI;
      post.mu_c_draws.push_back(mu);
      post.tau_draws(row, 0) = tau_c;
      for (std::size_t k = 0; k < K; ++k) post.tau_draws(row, static_cast<Eigen::Index>(k) + 1) = tau_h[k];
    }
  }
  return post;
}

// log c(a0) for the normal model with one shared precision and flat/Jeffreys
// initial priors, from weighted sufficient statistics.  The integral
// diverges (+inf) unless the weighted historical sample size exceeds one.
double normal_log_c(std::span<const TwoGroupSummary> hist, std::span<const double> a0) {
  double A = 0.0, wsum = 0.0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    A += a0[k] * hist[k].n;
    wsum += a0[k] * hist[k].y_sum;
  }
  if (A <= 1.0) return kInf;
  double mubar = wsum / A;
  double Q = 0.0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    double ybar = sample_mean(hist[k]);
    Q += a0[k] * ((hist[k].n - 1) * hist[k].v.value_or(0.0) +
                  hist[k].n * (ybar - mubar) * (ybar - mubar));
  }
  if (Q <= 0.0) return kInf;
  constexpr double log2pi = 1.8378770664093453;
  return 0.5 * (1.0 - A) * log2pi - 0.5 * std::log(A) + std::lgamma(0.5 * (A - 1.0)) -
         0.5 * (A - 1.0) * std::log(0.5 * Q);
}

TwoGroupPosterior fit_normal_random(const TwoGroupSummary& current,
                                    const std::vector<HistoricalSet>& historical,
                                    const PriorSpec& prior,
                                    std::span<const SliceConfig> a0_slice, long nMC, long nBI,
                                    RngStream& rng) {
  const std::size_t K = historical.size();
  const long kept = nMC - nBI;
  std::vector<TwoGroupSummary> hist;
  hist.reserve(K);
  for (const auto& h : historical) hist.push_back(h.two_group());

  TwoGroupPosterior post;
  post.mu_c_draws.reserve(kept);
  post.tau_draws.resize(kept, 1);
  post.a0_draws.resize(kept, static_cast<Eigen::Index>(K));

  std::vector<double> a0(K, 0.5);
  double mu = 0.0;
  {
    double num = current.y_sum, den = static_cast<double>(current.n);
    for (const auto& h : hist) {
      num += 0.5 * h.y_sum;
      den += 0.5 * h.n;
    }
    mu = den > 0 ? num / den : 0.0;
  }
  double tau = 1.0;
  constexpr double log2pi = 1.8378770664093453;

  std::vector<NormalMeanTerm> terms;
  for (long it = 0; it < nMC; ++it) {
    // tau | mu, a0 (shared across current and historical data)
    double wn = static_cast<double>(current.n);
    double wrss = current.n > 0 ? rss_about(current, mu) : 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      wn += a0[k] * hist[k].n;
      wrss += a0[k] * rss_about(hist[k], mu);
    }
    tau = gibbs_normal_precision(wn, wrss, jeffreys_precision, rng);

    // mu | tau, a0
    terms.clear();
    if (current.n > 0) terms.push_back({static_cast<double>(current.n), sample_mean(current), tau, 1.0});
    for (std::size_t k = 0; k < K; ++k)
      terms.push_back({static_cast<double>(hist[k].n), sample_mean(hist[k]), tau, a0[k]});
    mu = gibbs_normal_mean(terms, flat_location, rng);

    // a0k | mu, tau, a0[-k]
    for (std::size_t k = 0; k < K; ++k) {
      auto target = [&](double cand) {
        std::vector<double> a = a0;
        a[k] = cand;
        double lp = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          lp += a[j] * (0.5 * hist[j].n * (std::log(tau) - log2pi) -
                        0.5 * tau * rss_about(hist[j], mu));
          lp += beta_log_pdf(a[j], prior.a0_shape1, prior.a0_shape2);
        }
        lp -= normal_log_c(hist, a);
        return lp;
      };
      a0[k] = slice_step(target, a0[k], a0_slice[k], rng);
    }

    if (it >= nBI) {
      long row = it - nBI;
      post.mu_c_draws.push_back(mu);
      post.tau_draws(row, 0) = tau;
      for (std::size_t k = 0; k < K; ++k) post.a0_draws(row, static_cast<Eigen::Index>(k)) = a0[k];
    }
  }
  return post;
}

// Marginal log density of a0 with mu_c integrated out analytically.  The
// weighted sums (wy = sum a0k y0k, wn parallel) are supplied by the caller
// so a coordinate update costs O(1).
double conjugate_a0_marginal(Family f, const TwoGroupSummary& current, double wy, double wn,
                             double s1, double s2) {
  switch (f) {
    case Family::Bernoulli: {
      double post = log_beta_fn(s1 + wy + current.y_sum, s2 + (wn - wy) + (current.n - current.y_sum));
      double pri = log_beta_fn(s1 + wy, s2 + (wn - wy));
      return post - pri;
    }
    case Family::Poisson: {
      double post = std::lgamma(s1 + wy + current.y_sum) -
                    (s1 + wy + current.y_sum) * std::log(s2 + wn + current.n);
      double pri = std::lgamma(s1 + wy) - (s1 + wy) * std::log(s2 + wn);
      return post - pri;
    }
    case Family::Exponential: {
      double post = std::lgamma(s1 + wn + current.n) -
                    (s1 + wn + current.n) * std::log(s2 + wy + current.y_sum);
      double pri = std::lgamma(s1 + wn) - (s1 + wn) * std::log(s2 + wy);
      return post - pri;
    }
    default:
      throw std::logic_error("conjugate a0 marginal undefined for this family");
  }
}

TwoGroupPosterior fit_conjugate_random(Family fam, const TwoGroupSummary& current,
                                       const std::vector<HistoricalSet>& historical,
                                       const PriorSpec& prior,
                                       std::span<const SliceConfig> a0_slice, long nMC, long nBI,
                                       RngStream& rng) {
  const std::size_t K = historical.size();
  const long kept = nMC - nBI;
  TwoGroupPosterior post;
  post.mu_c_draws.reserve(kept);
  post.a0_draws.resize(kept, static_cast<Eigen::Index>(K));

  std::vector<double> y0(K), n0(K);
  for (std::size_t k = 0; k < K; ++k) {
    y0[k] = historical[k].two_group().y_sum;
    n0[k] = static_cast<double>(historical[k].two_group().n);
  }
  std::vector<double> a0(K, 0.5);
  double wy = 0.0, wn = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    wy += a0[k] * y0[k];
    wn += a0[k] * n0[k];
  }

  for (long it = 0; it < nMC; ++it) {
    for (std::size_t k = 0; k < K; ++k) {
      double base_wy = wy - a0[k] * y0[k];
      double base_wn = wn - a0[k] * n0[k];
      auto target = [&](double cand) {
        return conjugate_a0_marginal(fam, current, base_wy + cand * y0[k], base_wn + cand * n0[k],
                                     prior.mu_c_shape1, prior.mu_c_shape2) +
               beta_log_pdf(cand, prior.a0_shape1, prior.a0_shape2);
      };
      a0[k] = slice_step(target, a0[k], a0_slice[k], rng);
      wy = base_wy + a0[k] * y0[k];
      wn = base_wn + a0[k] * n0[k];
    }
    if (it >= nBI) {
      long row = it - nBI;
      std::span<const HistoricalSet> hs(historical);
      ConjugateForm cond = conjugate_control_posterior(fam, current, hs, a0, prior);
      post.mu_c_draws.push_back(conjugate_draw(cond, rng));
      for (std::size_t k = 0; k < K; ++k) post.a0_draws(row, static_cast<Eigen::Index>(k)) = a0[k];
    }
  }
  return post;
}

}  // namespace

TwoGroupPosterior fit_two_group_fixed_a0(const EndpointSpec& endpoint,
                                         const TwoGroupSummary& current,
                                         const std::vector<HistoricalSet>& historical,
                                         const PriorSpec& prior, long nMC, long nBI,
                                         RngStream& rng) {
  if (nMC <= nBI) throw std::invalid_argument("nMC must exceed nBI");
  if (current.n <= 0 && historical.empty())
    throw std::invalid_argument("posterior improper: no current or historical data");
  std::vector<double> a0 = fixed_a0_weights(historical);
  Family fam = collapse_binomial(endpoint.family);
  if (fam == Family::Normal) return fit_normal_fixed(current, historical, a0, nMC, nBI, rng);

  TwoGroupPosterior post;
  post.conjugate = conjugate_control_posterior(fam, current, historical, a0, prior);
  long kept = nMC - nBI;
  post.mu_c_draws.reserve(kept);
  for (long i = 0; i < kept; ++i) post.mu_c_draws.push_back(conjugate_draw(*post.conjugate, rng));
  return post;
}

TwoGroupPosterior fit_two_group_random_a0(const EndpointSpec& endpoint,
                                          const TwoGroupSummary& current,
                                          const std::vector<HistoricalSet>& historical,
                                          const PriorSpec& prior,
                                          std::span<const SliceConfig> a0_slice, long nMC,
                                          long nBI, RngStream& rng) {
  if (nMC <= nBI) throw std::invalid_argument("nMC must exceed nBI");
  if (historical.empty())
    throw std::invalid_argument("random-a0 fit requires at least one historical set");
  std::vector<SliceConfig> cfg(a0_slice.begin(), a0_slice.end());
  cfg.resize(historical.size(), a0_slice_defaults());
  Family fam = collapse_binomial(endpoint.family);
  if (fam == Family::Normal)
    return fit_normal_random(current, historical, prior, cfg, nMC, nBI, rng);
  return fit_conjugate_random(fam, current, historical, prior, cfg, nMC, nBI, rng);
}

namespace {

double conjugate_cdf(const ConjugateForm& c, double x) {
  if (c.kind == ConjugateForm::Kind::Beta) return beta_cdf(x, c.shape1, c.shape2);
  return gamma_cdf(x, c.shape1, c.shape2);
}

double conjugate_quantile(const ConjugateForm& c, double u) {
  if (c.kind == ConjugateForm::Kind::Beta) return beta_quantile(u, c.shape1, c.shape2);
  return gamma_quantile(u, c.shape1, c.shape2);
}

// P(T < shift(C)) for independent conjugate posteriors, integrated in the
// control quantile scale: int_0^1 F_t(shift(Q_c(u))) du.  The integrand is
// bounded and monotone, so the adaptive rule converges even for extreme
// shapes.
double prob_quadrature(const ConjugateForm& control, const ConjugateForm& treatment,
                       bool ratio_scale, double delta) {
  auto integrand = [&](double u) {
    double m = conjugate_quantile(control, u);
    double cut = ratio_scale ? delta * m : m + delta;
    return conjugate_cdf(treatment, cut);
  };
  return integrate_gk_checked(integrand, 0.0, 1.0, 1e-6);
}

}  // namespace

double reject_probability(const EndpointSpec& endpoint, const TwoGroupPosterior& control,
                          const TwoGroupSummary& treatment, const PriorSpec& prior, double delta,
                          RngStream& rng) {
  (void)rng;  // all paths are deterministic given the control draws
  if (treatment.n <= 0) throw std::invalid_argument("treatment data is empty");
  Family fam = collapse_binomial(endpoint.family);
  const bool ratio_scale = fam == Family::Exponential;

  if (fam == Family::Normal) {
    if (treatment.n < 2 || !treatment.v || !(*treatment.v > 0))
      throw std::invalid_argument("normal treatment posterior needs n >= 2 and positive variance");
    // mu_t | data is ybar_t + (s/sqrt(n)) t_{n-1} under the flat/Jeffreys
    // priors; average its CDF over the control draws.
    double ybar = treatment.y_sum / static_cast<double>(treatment.n);
    double scale = std::sqrt(*treatment.v / static_cast<double>(treatment.n));
    double df = static_cast<double>(treatment.n - 1);
    double acc = 0.0;
    for (double mu_c : control.mu_c_draws)
      acc += student_t_cdf((mu_c + delta - ybar) / scale, df);
    return acc / static_cast<double>(control.mu_c_draws.size());
  }

  ConjugateForm treat_post = conjugate_treatment_posterior(fam, treatment, prior);
  if (control.conjugate)
    return prob_quadrature(*control.conjugate, treat_post, ratio_scale, delta);

  if (control.mu_c_draws.empty()) throw std::invalid_argument("control posterior has no draws");
  double acc = 0.0;
  for (double mu_c : control.mu_c_draws) {
    double cut = ratio_scale ? delta * mu_c : mu_c + delta;
    acc += conjugate_cdf(treat_post, cut);
  }
  return acc / static_cast<double>(control.mu_c_draws.size());
}

}  // namespace ppd
