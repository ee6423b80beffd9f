#include "ppd/design.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "ppd/dist.hpp"
#include "ppd/parallel.hpp"

namespace ppd {

EstimationMethod estimation_method(Family f, ModelKind m, A0Mode a) {
  if (f == Family::Normal) {
    return a == A0Mode::Fixed ? EstimationMethod::Gibbs : EstimationMethod::GibbsSlice;
  }
  if (m == ModelKind::TwoGroup)
    return a == A0Mode::Fixed ? EstimationMethod::NumericalIntegration : EstimationMethod::Slice;
  return a == A0Mode::Fixed ? EstimationMethod::Slice : EstimationMethod::SlicePwk;
}

namespace {

double atom(const SamplingPrior& sp, std::size_t idx) { return sp.draws(static_cast<Eigen::Index>(idx), 0); }

// Simulated sufficient statistics for one arm.
TwoGroupSummary simulate_summary(Family f, long n, double mu, double var, RngStream& rng) {
  TwoGroupSummary s;
  s.n = n;
  switch (f) {
    case Family::Bernoulli:
    case Family::Binomial:
      s.y_sum = static_cast<double>(rng.binomial(n, mu));
      break;
    case Family::Poisson:
      s.y_sum = static_cast<double>(rng.poisson(static_cast<double>(n) * mu));
      break;
    case Family::Exponential:
      s.y_sum = rng.gamma(static_cast<double>(n), mu);
      break;
    case Family::Normal: {
      double ybar = rng.normal(mu, std::sqrt(var / static_cast<double>(n)));
      double ss = var * rng.chi_squared(static_cast<double>(n - 1));
      s.y_sum = ybar * static_cast<double>(n);
      s.v = ss / static_cast<double>(n - 1);
      break;
    }
  }
  return s;
}

struct TrialTally {
  std::vector<std::uint8_t> reject;
  Eigen::MatrixXd post_means;  // one row per trial (GLM runs)
  std::vector<std::uint8_t> excluded;
};

OperatingCharacteristic reduce(const TrialTally& t, bool with_means) {
  OperatingCharacteristic oc;
  long N = static_cast<long>(t.reject.size());
  for (long b = 0; b < N; ++b) {
    if (!t.excluded.empty() && t.excluded[b]) {
      ++oc.excluded;
      continue;
    }
    oc.rejections += t.reject[b];
    ++oc.trials;
  }
  if (oc.trials == 0) throw std::runtime_error("no usable trials");
  oc.estimate = static_cast<double>(oc.rejections) / static_cast<double>(oc.trials);
  oc.mc_stderr = std::sqrt(oc.estimate * (1.0 - oc.estimate) / static_cast<double>(oc.trials));
  if (with_means && t.post_means.rows() > 0) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(t.post_means.cols());
    long used = 0;
    for (long b = 0; b < N; ++b) {
      if (!t.excluded.empty() && t.excluded[b]) continue;
      sum += t.post_means.row(b).transpose();
      ++used;
    }
    sum /= static_cast<double>(used);
    oc.average_posterior_means.assign(sum.data(), sum.data() + sum.size());
  }
  return oc;
}

void check_sampling_priors(const TwoGroupDesign& d) {
  ValidationReport rep;
  validate_sampling_prior(d.samp_t, d.endpoint.family, 1, "samp_t", rep);
  validate_sampling_prior(d.samp_c, d.endpoint.family, 1, "samp_c", rep);
  if (!rep.empty()) throw std::invalid_argument(format_report(rep));
}

}  // namespace

OperatingCharacteristic power_two_group(const TwoGroupDesign& d, std::uint64_t seed, int workers,
                                        const ProgressFn& progress) {
  check_sampling_priors(d);
  if (d.design.n_t < 1 || d.design.n_c < 1)
    throw std::invalid_argument("two-group design needs n_t and n_c");
  if (d.endpoint.family == Family::Normal && (d.design.n_t < 2 || d.design.n_c < 2))
    throw std::invalid_argument("normal designs need group sizes of at least 2");
  if (d.a0_mode == A0Mode::Random && d.historical.empty())
    throw std::invalid_argument("random-a0 design requires historical data");
  const Family fam = d.endpoint.family;
  const bool normal = fam == Family::Normal;
  const long N = d.design.N;

  TrialTally tally;
  tally.reject.assign(N, 0);
  std::atomic<long> done{0};

  parallel_for(N, workers, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    double mu_t = atom(d.samp_t, rng.index(static_cast<std::size_t>(d.samp_t.draws.rows())));
    double mu_c = atom(d.samp_c, rng.index(static_cast<std::size_t>(d.samp_c.draws.rows())));
    double var_t = 1.0, var_c = 1.0;
    if (normal) {
      var_t = d.samp_t.variance_draws[rng.index(d.samp_t.variance_draws.size())];
      var_c = d.samp_c.variance_draws[rng.index(d.samp_c.variance_draws.size())];
    }
    TwoGroupSummary yt = simulate_summary(fam, d.design.n_t, mu_t, var_t, rng);
    TwoGroupSummary yc = simulate_summary(fam, d.design.n_c, mu_c, var_c, rng);

    TwoGroupPosterior control;
    if (d.a0_mode == A0Mode::Fixed && !normal) {
      // Conjugate fast path: the exact posterior feeds the quadrature rule
      // directly, no sampling needed.
      std::vector<double> a0;
      for (const auto& h : d.historical) {
        if (!h.a0) throw std::invalid_argument("fixed-a0 design requires a0 weights");
        a0.push_back(*h.a0);
      }
      control.conjugate = conjugate_control_posterior(fam, yc, d.historical, a0, d.prior);
    } else if (d.a0_mode == A0Mode::Fixed) {
      control = fit_two_group_fixed_a0(d.endpoint, yc, d.historical, d.prior, d.design.nMC,
                                       d.design.nBI, rng);
    } else {
      control = fit_two_group_random_a0(d.endpoint, yc, d.historical, d.prior, d.a0_slice,
                                        d.design.nMC, d.design.nBI, rng);
    }
    double p = reject_probability(d.endpoint, control, yt, d.prior, d.design.delta, rng);
    tally.reject[b] = p >= d.design.gamma ? 1 : 0;
    if (progress) progress(done.fetch_add(1) + 1, N);
  });
  return reduce(tally, /*with_means=*/false);
}

namespace {

struct CovariatePool {
  Eigen::MatrixXd rows;  // covariates without the treatment column
};

CovariatePool covariate_pool(const GlmDesign& d) {
  if (d.x_samples && !d.historical.empty())
    throw std::invalid_argument("provide either historical data or x_samples, not both");
  if (d.x_samples) return {*d.x_samples};
  if (d.historical.empty())
    throw std::invalid_argument("one of historical and x_samples must be provided");
  Eigen::Index cols = d.historical.front().glm().X.cols();
  Eigen::Index total = 0;
  for (const auto& h : d.historical) {
    if (h.glm().X.cols() != cols)
      throw std::invalid_argument("historical covariate column counts differ");
    total += h.glm().X.rows();
  }
  Eigen::MatrixXd pool(total, cols);
  Eigen::Index at = 0;
  for (const auto& h : d.historical) {
    pool.middleRows(at, h.glm().X.rows()) = h.glm().X;
    at += h.glm().X.rows();
  }
  return {pool};
}

// Draws one simulated current dataset.  Consumes the rng identically for
// the exact and approximate paths so both see the same data at one seed.
GlmData simulate_glm_trial(const GlmDesign& d, const CovariatePool& pool,
                           const Eigen::VectorXd& beta, double var, RngStream& rng) {
  const long n = d.design.data_size;
  const Eigen::Index p_cov = pool.rows.cols();
  GlmData out;
  out.X.resize(n, 1 + p_cov);
  out.y.resize(n);
  for (long i = 0; i < n; ++i) {
    std::size_t ridx = pool.rows.rows() > 0 ? rng.index(static_cast<std::size_t>(pool.rows.rows())) : 0;
    double treat = rng.uniform() < d.treatment_allocation ? 1.0 : 0.0;
    out.X(i, 0) = treat;
    if (p_cov > 0) out.X.row(i).tail(p_cov) = pool.rows.row(static_cast<Eigen::Index>(ridx));
    double eta = beta[0] + beta[1] * treat;
    for (Eigen::Index j = 0; j < p_cov; ++j) eta += beta[2 + j] * out.X(i, 1 + j);
    switch (d.endpoint.family) {
      case Family::Normal:
        out.y[i] = rng.normal(eta, std::sqrt(var));
        break;
      case Family::Bernoulli:
      case Family::Binomial:
        out.y[i] = static_cast<double>(rng.binomial(1, link_eval(d.endpoint.link, eta)));
        break;
      case Family::Poisson:
        out.y[i] = static_cast<double>(rng.poisson(link_eval(d.endpoint.link, eta)));
        break;
      case Family::Exponential:
        out.y[i] = rng.exponential(link_eval(d.endpoint.link, eta));
        break;
    }
  }
  return out;
}

void check_glm_design(const GlmDesign& d, const CovariatePool& pool) {
  if (d.design.data_size < 1) throw std::invalid_argument("GLM design needs data_size");
  Eigen::Index want = 2 + pool.rows.cols();
  if (d.samp_beta.draws.rows() < 1) throw std::invalid_argument("sampling prior has no atoms");
  if (d.samp_beta.draws.cols() != want)
    throw std::invalid_argument("samp_beta needs " + std::to_string(want) +
                                " columns (intercept, treatment, covariates)");
  if (d.endpoint.family == Family::Normal && d.samp_beta.variance_draws.empty())
    throw std::invalid_argument("normal GLM design needs variance atoms");
  if (d.a0_mode == A0Mode::Random && d.endpoint.family != Family::Normal && !d.surface)
    throw std::invalid_argument(
        "random-a0 GLM design needs a fitted normalizing-constant surface");
}

}  // namespace

OperatingCharacteristic power_glm(const GlmDesign& d, std::uint64_t seed, int workers,
                                  const ProgressFn& progress) {
  CovariatePool pool = covariate_pool(d);
  check_glm_design(d, pool);
  const long N = d.design.N;
  const Eigen::Index p = d.samp_beta.draws.cols();

  TrialTally tally;
  tally.reject.assign(N, 0);
  tally.post_means.resize(N, p);
  std::atomic<long> done{0};

  parallel_for(N, workers, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    Eigen::VectorXd beta =
        d.samp_beta.draws.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(d.samp_beta.draws.rows())))).transpose();
    double var = 1.0;
    if (d.endpoint.family == Family::Normal)
      var = d.samp_beta.variance_draws[rng.index(d.samp_beta.variance_draws.size())];
    GlmData current = simulate_glm_trial(d, pool, beta, var, rng);

    GlmOptions opts;
    opts.nMC = d.design.nMC;
    opts.nBI = d.design.nBI;
    opts.beta_slice = d.beta_slice;
    opts.a0_slice = d.a0_slice;
    GlmPosterior post;
    if (d.a0_mode == A0Mode::Fixed) {
      post = fit_glm_fixed_a0(d.endpoint, &current, d.historical, opts, rng);
    } else {
      post = fit_glm_random_a0(d.endpoint, &current, d.historical, d.prior,
                               d.surface ? &*d.surface : nullptr, opts, rng);
    }
    long below = 0;
    for (Eigen::Index r = 0; r < post.beta_draws.rows(); ++r)
      if (post.beta_draws(r, 1) < d.design.delta) ++below;
    double prob = static_cast<double>(below) / static_cast<double>(post.beta_draws.rows());
    tally.reject[b] = prob >= d.design.gamma ? 1 : 0;
    tally.post_means.row(b) = post.beta_draws.colwise().mean();
    if (progress) progress(done.fetch_add(1) + 1, N);
  });
  return reduce(tally, /*with_means=*/true);
}

OperatingCharacteristic power_glm_approx(const GlmDesign& d, std::uint64_t seed, int workers,
                                         const ProgressFn& progress) {
  if (d.a0_mode != A0Mode::Fixed)
    throw std::invalid_argument("the asymptotic approximation supports fixed a0 only");
  if (d.endpoint.link != canonical_link(d.endpoint.family))
    throw std::invalid_argument("the asymptotic approximation requires the canonical link");
  CovariatePool pool = covariate_pool(d);
  check_glm_design(d, pool);
  const long N = d.design.N;
  const Eigen::Index p = d.samp_beta.draws.cols();
  const bool normal = d.endpoint.family == Family::Normal;

  Eigen::VectorXd a0(static_cast<Eigen::Index>(d.historical.size()));
  for (std::size_t k = 0; k < d.historical.size(); ++k) {
    if (!d.historical[k].a0) throw std::invalid_argument("fixed-a0 design requires a0 weights");
    a0[static_cast<Eigen::Index>(k)] = *d.historical[k].a0;
  }

  TrialTally tally;
  tally.reject.assign(N, 0);
  tally.excluded.assign(N, 0);
  tally.post_means.resize(N, p);
  tally.post_means.setZero();
  std::atomic<long> done{0};

  parallel_for(N, workers, [&](long b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    Eigen::VectorXd beta =
        d.samp_beta.draws.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(d.samp_beta.draws.rows())))).transpose();
    double var = 1.0;
    if (normal) var = d.samp_beta.variance_draws[rng.index(d.samp_beta.variance_draws.size())];
    GlmData current = simulate_glm_trial(d, pool, beta, var, rng);

    double prob;
    Eigen::VectorXd mode;
    if (normal) {
      // Weighted least squares; with flat beta and Jeffreys tau the
      // marginal posterior of beta_1 is exactly Student-t.
      Eigen::MatrixXd Xc(current.y.size(), p);
      Xc.col(0).setOnes();
      Xc.rightCols(p - 1) = current.X;
      Eigen::MatrixXd G = Xc.transpose() * Xc;
      Eigen::VectorXd h = Xc.transpose() * current.y;
      double wn = static_cast<double>(current.y.size());
      std::vector<Eigen::MatrixXd> hx;
      for (std::size_t k = 0; k < d.historical.size(); ++k) {
        const GlmData& g = d.historical[k].glm();
        Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(g.y.size(), p);
        Z.col(0).setOnes();
        if (g.X.cols() > 0) Z.rightCols(g.X.cols()) = g.X;
        double w = a0[static_cast<Eigen::Index>(k)];
        G += w * (Z.transpose() * Z);
        h += w * (Z.transpose() * g.y);
        wn += w * static_cast<double>(g.y.size());
        hx.push_back(std::move(Z));
      }
      Eigen::LLT<Eigen::MatrixXd> llt(G);
      if (llt.info() != Eigen::Success) {
        tally.excluded[b] = 1;
        if (progress) progress(done.fetch_add(1) + 1, N);
        return;
      }
      mode = llt.solve(h);
      double ssr = (current.y - Xc * mode).squaredNorm();
      for (std::size_t k = 0; k < d.historical.size(); ++k)
        ssr += a0[static_cast<Eigen::Index>(k)] *
               (d.historical[k].glm().y - hx[k] * mode).squaredNorm();
      double dof = wn - static_cast<double>(p);
      double sigma2 = ssr / dof;
      Eigen::MatrixXd cov = sigma2 * llt.solve(Eigen::MatrixXd::Identity(p, p));
      double se = std::sqrt(cov(1, 1));
      prob = student_t_cdf((d.design.delta - mode[1]) / se, dof);
    } else {
      NewtonResult nr = glm_kernel_newton(d.endpoint, &current, d.historical, a0);
      if (!nr.converged) {
        tally.excluded[b] = 1;
        if (progress) progress(done.fetch_add(1) + 1, N);
        return;
      }
      mode = nr.mode;
      double se = std::sqrt(nr.cov(1, 1));
      prob = normal_cdf((d.design.delta - mode[1]) / se);
    }
    tally.reject[b] = prob >= d.design.gamma ? 1 : 0;
    tally.post_means.row(b) = mode.transpose();
    if (progress) progress(done.fetch_add(1) + 1, N);
  });

  long excluded = 0;
  for (std::uint8_t e : tally.excluded) excluded += e;
  if (excluded * 20 > N)
    throw std::runtime_error("approximation failed: " + std::to_string(excluded) + " of " +
                             std::to_string(N) + " trials did not converge");
  return reduce(tally, /*with_means=*/true);
}

SampleSizeResult find_sample_size(const std::function<double(long n, bool null_mass)>& evaluate,
                                  double alpha0, double alpha1,
                                  const std::vector<long>& n_grid) {
  if (n_grid.empty()) throw std::invalid_argument("sample size grid is empty");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("sample size grid must be strictly increasing");
  SampleSizeResult res;
  for (long n : n_grid) {
    SampleSizeRow row;
    row.n = n;
    row.type1_error = evaluate(n, true);
    row.power = evaluate(n, false);
    if (!res.n_alpha0 && row.type1_error <= alpha0) res.n_alpha0 = n;
    if (!res.n_alpha1 && row.power >= 1.0 - alpha1) res.n_alpha1 = n;
    res.table.push_back(row);
  }
  if (res.n_alpha0 && res.n_alpha1) res.n_final = std::max(*res.n_alpha0, *res.n_alpha1);
  return res;
}

}  // namespace ppd
