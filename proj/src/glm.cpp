#include "ppd/glm.hpp"

#include <cmath>
#include <stdexcept>

#include "ppd/dist.hpp"
#include "ppd/norm_const.hpp"

namespace ppd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

struct Dataset {
  Eigen::MatrixXd X;       // aligned design, intercept in column 0
  Eigen::VectorXd y;
  Eigen::VectorXd trials;  // all ones unless binomial
  bool is_current = false;
};

// Log likelihood at eta + X.col(j) * shift (j < 0 means no shift), with
// additive data-only constants dropped.  Returns -inf when a link domain
// constraint is violated by any row.
double loglik_shifted(Family fam, Link link, const Dataset& d, const Eigen::VectorXd& eta,
                      Eigen::Index j, double shift) {
  const Eigen::Index n = d.y.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double e = eta[i];
    if (j >= 0) e += d.X(i, j) * shift;
    double y = d.y[i];
    switch (fam) {
      case Family::Bernoulli:
      case Family::Binomial: {
        double t = d.trials[i];
        switch (link) {
          case Link::Logit:
            s += y * e - t * softplus(e);
            break;
          case Link::Probit: {
            if (y > 0.0) {
              double m = 0.5 * std::erfc(-e / std::sqrt(2.0));
              if (m <= 0.0) return -kInf;
              s += y * std::log(m);
            }
            if (t - y > 0.0) {
              double m = 0.5 * std::erfc(e / std::sqrt(2.0));
              if (m <= 0.0) return -kInf;
              s += (t - y) * std::log(m);
            }
            break;
          }
          case Link::IdentityProbability:
            if (e <= 0.0 || e >= 1.0) return -kInf;
            s += y * std::log(e) + (t - y) * std::log1p(-e);
            break;
          case Link::CLogLog: {
            double u = std::exp(e);
            if (!std::isfinite(u)) return t - y > 0.0 ? -kInf : s;
            double log_m;
            if (u > 1e-8) {
              double om = -std::expm1(-u);
              if (om <= 0.0) return -kInf;
              log_m = std::log(om);
            } else {
              log_m = e;  // m ~ u for tiny u
            }
            s += y * log_m - (t - y) * u;
            break;
          }
          default:
            throw std::invalid_argument("unsupported link for Bernoulli/binomial data");
        }
        break;
      }
      case Family::Poisson:
        if (link == Link::Log) {
          s += y * e - std::exp(e);
        } else if (link == Link::IdentityPositive) {
          if (e <= 0.0) return -kInf;
          s += y * std::log(e) - e;
        } else {
          throw std::invalid_argument("unsupported link for Poisson data");
        }
        break;
      case Family::Exponential:
        if (link == Link::Log) {
          s += e - y * std::exp(e);
        } else if (link == Link::IdentityPositive) {
          if (e <= 0.0) return -kInf;
          s += std::log(e) - y * e;
        } else {
          throw std::invalid_argument("unsupported link for exponential data");
        }
        break;
      case Family::Normal:
        throw std::logic_error("normal likelihood is handled by the Gibbs path");
    }
    if (s == -kInf) return -kInf;
  }
  return s;
}

Eigen::VectorXd ones_trials(Eigen::Index n) { return Eigen::VectorXd::Ones(n); }

bool has_rows(const GlmData* d) { return d != nullptr && d->y.size() > 0; }

// Aligns every dataset to one coefficient layout.  With current data:
// [intercept, treatment, covariates...]; historical sets get a zero
// treatment column.  Without current data the treatment column does not
// exist and historical covariates follow the intercept directly.
std::vector<Dataset> build_datasets(const GlmData* current,
                                    std::span<const HistoricalSet> historical,
                                    bool include_current) {
  std::vector<Dataset> out;
  const bool with_current = include_current && has_rows(current);
  Eigen::Index hist_cov = -1;
  for (const auto& h : historical) {
    if (h.is_two_group())
      throw std::invalid_argument("GLM fit received two-group historical data");
    if (hist_cov < 0)
      hist_cov = h.glm().X.cols();
    else if (h.glm().X.cols() != hist_cov)
      throw std::invalid_argument("historical covariate column counts differ");
  }
  if (with_current) {
    if (current->X.cols() < 1)
      throw std::invalid_argument("current design matrix needs a treatment column");
    if (hist_cov >= 0 && hist_cov != current->X.cols() - 1)
      throw std::invalid_argument(
          "historical covariates must match current covariates minus the treatment column");
    Dataset d;
    d.is_current = true;
    d.y = current->y;
    d.X.resize(current->y.size(), current->X.cols() + 1);
    d.X.col(0).setOnes();
    d.X.rightCols(current->X.cols()) = current->X;
    d.trials = current->trials ? *current->trials : ones_trials(d.y.size());
    out.push_back(std::move(d));
  }
  const Eigen::Index p = with_current ? current->X.cols() + 1 : hist_cov + 1;
  for (const auto& h : historical) {
    const GlmData& g = h.glm();
    Dataset d;
    d.y = g.y;
    d.X = Eigen::MatrixXd::Zero(g.y.size(), p);
    d.X.col(0).setOnes();
    // covariates go in the trailing columns; with current data present the
    // treatment column (index 1) stays zero for historical controls
    if (g.X.cols() > 0) d.X.rightCols(g.X.cols()) = g.X;
    d.trials = g.trials ? *g.trials : ones_trials(d.y.size());
    out.push_back(std::move(d));
  }
  if (out.empty()) throw std::invalid_argument("GLM fit needs current or historical data");
  return out;
}

std::vector<double> dataset_weights(const std::vector<Dataset>& data,
                                    std::span<const HistoricalSet> historical,
                                    const std::optional<Eigen::VectorXd>& a0_override) {
  std::vector<double> w;
  w.reserve(data.size());
  std::size_t k = 0;
  for (const auto& d : data) {
    if (d.is_current) {
      w.push_back(1.0);
      continue;
    }
    if (a0_override) {
      if (k >= static_cast<std::size_t>(a0_override->size()))
        throw std::invalid_argument("a0 override shorter than historical list");
      w.push_back((*a0_override)[k]);
    } else {
      if (!historical[k].a0)
        throw std::invalid_argument("fixed-a0 fit requires a0 on every historical set");
      w.push_back(*historical[k].a0);
    }
    ++k;
  }
  return w;
}

double default_intercept(Link link) {
  switch (link) {
    case Link::IdentityPositive: return 1.0;
    case Link::IdentityProbability: return 0.5;
    default: return 0.0;
  }
}

struct SweepState {
  Family fam;
  Link link;
  std::vector<Dataset> data;
  std::vector<double> weight;
  std::vector<Eigen::VectorXd> eta;
  std::vector<double> ll;
  std::vector<std::vector<bool>> col_active;
  Eigen::VectorXd beta;
};

void refresh_state(SweepState& st) {
  for (std::size_t d = 0; d < st.data.size(); ++d) {
    st.eta[d] = st.data[d].X * st.beta;
    st.ll[d] = loglik_shifted(st.fam, st.link, st.data[d], st.eta[d], -1, 0.0);
  }
}

SweepState make_sweep_state(Family fam, Link link, std::vector<Dataset> data,
                            std::vector<double> weight, const Eigen::VectorXd& beta) {
  SweepState st;
  st.fam = fam;
  st.link = link;
  st.data = std::move(data);
  st.weight = std::move(weight);
  st.beta = beta;
  st.eta.resize(st.data.size());
  st.ll.resize(st.data.size());
  st.col_active.resize(st.data.size());
  for (std::size_t d = 0; d < st.data.size(); ++d) {
    auto& act = st.col_active[d];
    act.resize(st.beta.size());
    for (Eigen::Index j = 0; j < st.beta.size(); ++j)
      act[j] = st.data[d].X.col(j).cwiseAbs().maxCoeff() != 0.0;
  }
  refresh_state(st);
  return st;
}

void sweep_coordinate(SweepState& st, Eigen::Index j, const SliceConfig& cfg, RngStream& rng) {
  const std::size_t D = st.data.size();
  double memo_b = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> memo_ll(D);
  auto target = [&](double b) {
    double s = 0.0;
    double shift = b - st.beta[j];
    for (std::size_t d = 0; d < D; ++d) {
      double l = st.col_active[d][j]
                     ? loglik_shifted(st.fam, st.link, st.data[d], st.eta[d], j, shift)
                     : st.ll[d];
      memo_ll[d] = l;
      if (st.weight[d] != 0.0) s += st.weight[d] * l;
    }
    memo_b = b;
    return s;
  };
  double nb;
  try {
    nb = slice_step(target, st.beta[j], cfg, rng);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("slice sampler stalled at coordinate " + std::to_string(j + 1));
  }
  double shift = nb - st.beta[j];
  for (std::size_t d = 0; d < D; ++d) {
    if (!st.col_active[d][j]) continue;
    st.eta[d] += st.data[d].X.col(j) * shift;
    st.ll[d] = (memo_b == nb) ? memo_ll[d]
                              : loglik_shifted(st.fam, st.link, st.data[d], st.eta[d], -1, 0.0);
  }
  st.beta[j] = nb;
}

std::vector<SliceConfig> padded(std::vector<SliceConfig> cfg, std::size_t n,
                                const SliceConfig& fill) {
  cfg.resize(n, fill);
  return cfg;
}

Eigen::VectorXd initial_beta(const GlmOptions& opts, Eigen::Index p, Link link) {
  if (opts.init_beta) {
    if (opts.init_beta->size() != p)
      throw std::invalid_argument("init_beta dimension mismatch");
    return *opts.init_beta;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b[0] = default_intercept(link);
  return b;
}

// ---- normal-family Gibbs paths ------------------------------------------

struct NormalPieces {
  Eigen::MatrixXd G;  // X'X
  Eigen::VectorXd h;  // X'y
  double yty;
  double n;
};

NormalPieces pieces_for(const Dataset& d) {
  return {d.X.transpose() * d.X, d.X.transpose() * d.y, d.y.squaredNorm(),
          static_cast<double>(d.y.size())};
}

double rss(const Dataset& d, const Eigen::VectorXd& beta) {
  return (d.y - d.X * beta).squaredNorm();
}

Eigen::VectorXd draw_mvn_from_precision(const Eigen::MatrixXd& P, const Eigen::VectorXd& b,
                                        RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("coefficient precision matrix is not positive definite");
  Eigen::VectorXd mean = llt.solve(b);
  Eigen::VectorXd z(P.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixU().solve(z);
}

GlmPosterior fit_normal_fixed(const std::vector<Dataset>& data, const std::vector<double>& w,
                              const GlmOptions& opts, RngStream& rng) {
  const Eigen::Index p = data[0].X.cols();
  const long kept = opts.nMC - opts.nBI;
  std::vector<NormalPieces> pc;
  pc.reserve(data.size());
  for (const auto& d : data) pc.push_back(pieces_for(d));

  // Weighted least squares start; fall back to zero if singular.
  Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd h0 = Eigen::VectorXd::Zero(p);
  for (std::size_t d = 0; d < data.size(); ++d) {
    G0 += w[d] * pc[d].G;
    h0 += w[d] * pc[d].h;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  {
    Eigen::LLT<Eigen::MatrixXd> llt(G0);
    if (llt.info() == Eigen::Success) beta = llt.solve(h0);
  }
  std::vector<double> tau(data.size(), 1.0);

  GlmPosterior post;
  post.beta_draws.resize(kept, p);
  post.tau_draws.resize(kept, static_cast<Eigen::Index>(data.size()));
  for (long it = 0; it < opts.nMC; ++it) {
    for (std::size_t d = 0; d < data.size(); ++d) {
      double wn = (data[d].is_current ? 1.0 : w[d]) * pc[d].n;
      if (wn <= 0.0) continue;
      double r = rss(data[d], beta);
      tau[d] = gibbs_normal_precision(wn, (data[d].is_current ? 1.0 : w[d]) * r,
                                      jeffreys_precision, rng);
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (std::size_t d = 0; d < data.size(); ++d) {
      double wt = (data[d].is_current ? 1.0 : w[d]) * tau[d];
      P += wt * pc[d].G;
      b += wt * pc[d].h;
    }
    beta = draw_mvn_from_precision(P, b, rng);
    if (it >= opts.nBI) {
      long row = it - opts.nBI;
      post.beta_draws.row(row) = beta.transpose();
      for (std::size_t d = 0; d < data.size(); ++d)
        post.tau_draws(row, static_cast<Eigen::Index>(d)) = tau[d];
    }
  }
  return post;
}

// log c(a0) for the normal GLM with shared precision: the flat-prior
// integral over the historically identified coefficients (the treatment
// coefficient never enters a historical likelihood, so its flat factor is
// constant in a0 and drops).
struct NormalSurfacePieces {
  std::vector<Eigen::MatrixXd> G;  // Z'Z on the identified subspace
  std::vector<Eigen::VectorXd> h;  // Z'y
  std::vector<double> yty;
  std::vector<double> n;
  Eigen::Index q = 0;
};

double normal_glm_log_c(const NormalSurfacePieces& sp, const Eigen::VectorXd& a0) {
  const Eigen::Index q = sp.q;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(q);
  double s = 0.0, A = 0.0;
  for (std::size_t k = 0; k < sp.G.size(); ++k) {
    M += a0[k] * sp.G[k];
    m += a0[k] * sp.h[k];
    s += a0[k] * sp.yty[k];
    A += a0[k] * sp.n[k];
  }
  // the integral diverges below the identified dimension
  if (A <= static_cast<double>(q)) return kInf;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return kInf;
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  double R = s - m.dot(llt.solve(m));
  if (R <= 0.0) return kInf;
  double df = A - static_cast<double>(q);
  return 0.5 * (static_cast<double>(q) - A) * kLog2Pi - 0.5 * logdet + std::lgamma(0.5 * df) -
         0.5 * df * std::log(0.5 * R);
}

GlmPosterior fit_normal_random(const std::vector<Dataset>& data, const PriorSpec& prior,
                               const GlmOptions& opts, const NormConstSurface* surface,
                               RngStream& rng) {
  const Eigen::Index p = data[0].X.cols();
  const long kept = opts.nMC - opts.nBI;
  const bool with_current = data[0].is_current;
  const std::size_t K = data.size() - (with_current ? 1 : 0);
  if (K == 0) throw std::invalid_argument("random-a0 fit requires historical data");

  std::vector<NormalPieces> pc;
  for (const auto& d : data) pc.push_back(pieces_for(d));

  NormalSurfacePieces sp;
  sp.q = with_current ? p - 1 : p;
  for (std::size_t d = with_current ? 1 : 0; d < data.size(); ++d) {
    Eigen::MatrixXd Z(data[d].X.rows(), sp.q);
    if (with_current) {
      Z.col(0) = data[d].X.col(0);
      if (p > 2) Z.rightCols(p - 2) = data[d].X.rightCols(p - 2);
    } else {
      Z = data[d].X;
    }
    sp.G.push_back(Z.transpose() * Z);
    sp.h.push_back(Z.transpose() * data[d].y);
    sp.yty.push_back(data[d].y.squaredNorm());
    sp.n.push_back(static_cast<double>(data[d].y.size()));
  }

  std::vector<SliceConfig> a0_cfg = padded(opts.a0_slice, K, a0_slice_defaults());
  if (surface != nullptr) {
    if (surface->hull_min.size() != static_cast<Eigen::Index>(K))
      throw std::invalid_argument("surface dimension does not match the number of historical sets");
    for (std::size_t k = 0; k < K; ++k) {
      auto ki = static_cast<Eigen::Index>(k);
      a0_cfg[k].lower = std::max(a0_cfg[k].lower, surface->hull_min[ki]);
      a0_cfg[k].upper = std::min(a0_cfg[k].upper, surface->hull_max[ki]);
      if (!(a0_cfg[k].lower < a0_cfg[k].upper))
        throw std::invalid_argument(
            "surface extrapolation: a0 slice bounds fall outside the grid hull");
    }
  }
  Eigen::VectorXd a0(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k)
    a0[static_cast<Eigen::Index>(k)] = 0.5 * (a0_cfg[k].lower + a0_cfg[k].upper);
  double tau = 1.0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  GlmPosterior post;
  post.beta_draws.resize(kept, p);
  post.tau_draws.resize(kept, 1);
  post.a0_draws.resize(kept, static_cast<Eigen::Index>(K));
  std::vector<double> r(data.size());
  for (long it = 0; it < opts.nMC; ++it) {
    double wn = 0.0, wrss = 0.0;
    for (std::size_t d = 0; d < data.size(); ++d) {
      r[d] = rss(data[d], beta);
      double wd = data[d].is_current ? 1.0 : a0[static_cast<Eigen::Index>(d - (with_current ? 1 : 0))];
      wn += wd * pc[d].n;
      wrss += wd * r[d];
    }
    tau = gibbs_normal_precision(wn, wrss, jeffreys_precision, rng);

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (std::size_t d = 0; d < data.size(); ++d) {
      double wd = data[d].is_current ? 1.0 : a0[static_cast<Eigen::Index>(d - (with_current ? 1 : 0))];
      P += tau * wd * pc[d].G;
      b += tau * wd * pc[d].h;
    }
    beta = draw_mvn_from_precision(P, b, rng);
    for (std::size_t d = 0; d < data.size(); ++d) r[d] = rss(data[d], beta);

    for (std::size_t k = 0; k < K; ++k) {
      auto target = [&](double cand) {
        Eigen::VectorXd a = a0;
        a[static_cast<Eigen::Index>(k)] = cand;
        double lp = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          std::size_t d = j + (with_current ? 1 : 0);
          lp += a[static_cast<Eigen::Index>(j)] *
                (0.5 * pc[d].n * (std::log(tau) - kLog2Pi) - 0.5 * tau * r[d]);
        }
        lp -= surface ? eval_surface(*surface, a) : normal_glm_log_c(sp, a);
        lp += beta_log_pdf(cand, prior.a0_shape1, prior.a0_shape2);
        return lp;
      };
      a0[static_cast<Eigen::Index>(k)] =
          slice_step(target, a0[static_cast<Eigen::Index>(k)], a0_cfg[k], rng);
    }

    if (it >= opts.nBI) {
      long row = it - opts.nBI;
      post.beta_draws.row(row) = beta.transpose();
      post.tau_draws(row, 0) = tau;
      post.a0_draws.row(row) = a0.transpose();
    }
  }
  return post;
}

}  // namespace

// ---- kernel ---------------------------------------------------------------

struct GlmKernel::Impl {
  Family fam;
  Link link;
  std::vector<Dataset> data;
  std::vector<double> weight;
  Eigen::Index p;
};

GlmKernel::GlmKernel(const EndpointSpec& endpoint, const GlmData* current,
                     std::span<const HistoricalSet> historical, Eigen::VectorXd a0,
                     bool include_current)
    : impl_(new Impl) {
  if (endpoint.family == Family::Normal)
    throw std::logic_error("the power-prior kernel is defined for non-normal families only");
  if (static_cast<std::size_t>(a0.size()) != historical.size())
    throw std::invalid_argument("a0 length must match the number of historical sets");
  impl_->fam = endpoint.family;
  impl_->link = endpoint.link;
  impl_->data = build_datasets(current, historical, include_current);
  impl_->weight = dataset_weights(impl_->data, historical, a0);
  impl_->p = impl_->data[0].X.cols();
}

GlmKernel::~GlmKernel() = default;
GlmKernel::GlmKernel(GlmKernel&&) noexcept = default;

double GlmKernel::operator()(const Eigen::VectorXd& beta) const {
  if (beta.size() != impl_->p) throw std::invalid_argument("kernel beta dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < impl_->data.size(); ++d) {
    if (impl_->weight[d] == 0.0) continue;
    Eigen::VectorXd eta = impl_->data[d].X * beta;
    double l = loglik_shifted(impl_->fam, impl_->link, impl_->data[d], eta, -1, 0.0);
    if (l == -kInf) return -kInf;
    s += impl_->weight[d] * l;
  }
  return s;
}

Eigen::Index GlmKernel::dim() const { return impl_->p; }

double glm_log_kernel_fixed_a0(const EndpointSpec& endpoint, const Eigen::VectorXd& beta,
                               const GlmData* current, std::span<const HistoricalSet> historical,
                               const Eigen::VectorXd& a0) {
  GlmKernel k(endpoint, current, historical, a0, /*include_current=*/current != nullptr);
  return k(beta);
}

double normal_glm_log_norm_const(std::span<const HistoricalSet> historical,
                                 const Eigen::VectorXd& a0) {
  if (historical.empty()) throw std::invalid_argument("no historical data");
  if (static_cast<std::size_t>(a0.size()) != historical.size())
    throw std::invalid_argument("a0 length must match the number of historical sets");
  NormalSurfacePieces sp;
  sp.q = historical.front().glm().X.cols() + 1;
  for (const auto& h : historical) {
    const GlmData& g = h.glm();
    Eigen::MatrixXd Z(g.y.size(), sp.q);
    Z.col(0).setOnes();
    if (g.X.cols() > 0) Z.rightCols(g.X.cols()) = g.X;
    sp.G.push_back(Z.transpose() * Z);
    sp.h.push_back(Z.transpose() * g.y);
    sp.yty.push_back(g.y.squaredNorm());
    sp.n.push_back(static_cast<double>(g.y.size()));
  }
  return normal_glm_log_c(sp, a0);
}

// ---- fits -------------------------------------------------------------------

GlmPosterior fit_glm_fixed_a0(const EndpointSpec& endpoint, const GlmData* current,
                              std::span<const HistoricalSet> historical, const GlmOptions& opts,
                              RngStream& rng) {
  if (opts.nMC <= opts.nBI) throw std::invalid_argument("nMC must exceed nBI");
  if (opts.include_current && !has_rows(current) && historical.empty())
    throw std::invalid_argument("GLM fit needs current or historical data");
  std::vector<Dataset> data = build_datasets(current, historical, opts.include_current);
  std::vector<double> w = dataset_weights(data, historical, opts.a0_override);

  if (endpoint.family == Family::Normal) return fit_normal_fixed(data, w, opts, rng);

  const Eigen::Index p = data[0].X.cols();
  Eigen::VectorXd beta = initial_beta(opts, p, endpoint.link);
  SweepState st = make_sweep_state(endpoint.family, endpoint.link, std::move(data), std::move(w),
                                   beta);
  std::vector<SliceConfig> cfg = padded(opts.beta_slice, p, beta_slice_defaults());

  const long kept = opts.nMC - opts.nBI;
  GlmPosterior post;
  post.beta_draws.resize(kept, p);
  for (long it = 0; it < opts.nMC; ++it) {
    for (Eigen::Index j = 0; j < p; ++j) sweep_coordinate(st, j, cfg[j], rng);
    if (it >= opts.nBI) post.beta_draws.row(it - opts.nBI) = st.beta.transpose();
  }
  return post;
}

GlmPosterior fit_glm_random_a0(const EndpointSpec& endpoint, const GlmData* current,
                               std::span<const HistoricalSet> historical, const PriorSpec& prior,
                               const NormConstSurface* surface, const GlmOptions& opts,
                               RngStream& rng) {
  if (opts.nMC <= opts.nBI) throw std::invalid_argument("nMC must exceed nBI");
  if (historical.empty())
    throw std::invalid_argument("random-a0 fit requires at least one historical set");
  const std::size_t K = historical.size();
  std::vector<Dataset> data =
      build_datasets(current, historical, /*include_current=*/has_rows(current));

  if (endpoint.family == Family::Normal)
    return fit_normal_random(data, prior, opts, surface, rng);

  if (surface == nullptr)
    throw std::invalid_argument("random-a0 GLM fit requires a normalizing-constant surface");
  if (surface->hull_min.size() != static_cast<Eigen::Index>(K))
    throw std::invalid_argument("surface dimension does not match the number of historical sets");

  // The slice bounds for each a0 coordinate must sit inside the fitted
  // grid hull; the surface cannot be evaluated outside it.
  std::vector<SliceConfig> a0_cfg = padded(opts.a0_slice, K, a0_slice_defaults());
  for (std::size_t k = 0; k < K; ++k) {
    auto ki = static_cast<Eigen::Index>(k);
    a0_cfg[k].lower = std::max(a0_cfg[k].lower, surface->hull_min[ki]);
    a0_cfg[k].upper = std::min(a0_cfg[k].upper, surface->hull_max[ki]);
    if (!(a0_cfg[k].lower < a0_cfg[k].upper))
      throw std::invalid_argument("surface extrapolation: a0 slice bounds fall outside the grid hull");
  }

  const bool with_current = data[0].is_current;
  Eigen::VectorXd a0(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k)
    a0[static_cast<Eigen::Index>(k)] = 0.5 * (a0_cfg[k].lower + a0_cfg[k].upper);

  const Eigen::Index p = data[0].X.cols();
  Eigen::VectorXd beta = initial_beta(opts, p, endpoint.link);
  std::vector<double> w(data.size(), 1.0);
  for (std::size_t k = 0; k < K; ++k)
    w[k + (with_current ? 1 : 0)] = a0[static_cast<Eigen::Index>(k)];
  SweepState st = make_sweep_state(endpoint.family, endpoint.link, std::move(data), std::move(w),
                                   beta);
  std::vector<SliceConfig> bcfg = padded(opts.beta_slice, p, beta_slice_defaults());

  const long kept = opts.nMC - opts.nBI;
  GlmPosterior post;
  post.beta_draws.resize(kept, p);
  post.a0_draws.resize(kept, static_cast<Eigen::Index>(K));
  for (long it = 0; it < opts.nMC; ++it) {
    for (Eigen::Index j = 0; j < p; ++j) sweep_coordinate(st, j, bcfg[j], rng);

    // a0 | beta: historical log likelihoods are fixed during this sweep.
    for (std::size_t k = 0; k < K; ++k) {
      auto ki = static_cast<Eigen::Index>(k);
      auto target = [&](double cand) {
        Eigen::VectorXd a = a0;
        a[ki] = cand;
        double lp = 0.0;
        for (std::size_t j = 0; j < K; ++j)
          lp += a[static_cast<Eigen::Index>(j)] * st.ll[j + (with_current ? 1 : 0)];
        lp -= eval_surface(*surface, a);
        lp += beta_log_pdf(cand, prior.a0_shape1, prior.a0_shape2);
        return lp;
      };
      a0[ki] = slice_step(target, a0[ki], a0_cfg[k], rng);
      st.weight[k + (with_current ? 1 : 0)] = a0[ki];
    }

    if (it >= opts.nBI) {
      long row = it - opts.nBI;
      post.beta_draws.row(row) = st.beta.transpose();
      post.a0_draws.row(row) = a0.transpose();
    }
  }
  return post;
}

// ---- Newton mode for the asymptotic path -----------------------------------

NewtonResult glm_kernel_newton(const EndpointSpec& endpoint, const GlmData* current,
                               std::span<const HistoricalSet> historical,
                               const Eigen::VectorXd& a0, int max_iter) {
  if (endpoint.family == Family::Normal)
    throw std::logic_error("normal approximation uses the closed-form path");
  if (endpoint.link != canonical_link(endpoint.family))
    throw std::invalid_argument("the asymptotic approximation requires the canonical link");
  std::vector<Dataset> data =
      build_datasets(current, historical, /*include_current=*/has_rows(current));
  std::vector<double> w = dataset_weights(data, historical, a0);
  const Eigen::Index p = data[0].X.cols();

  auto kernel = [&](const Eigen::VectorXd& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < data.size(); ++d) {
      if (w[d] == 0.0) continue;
      Eigen::VectorXd eta = data[d].X * b;
      s += w[d] * loglik_shifted(endpoint.family, endpoint.link, data[d], eta, -1, 0.0);
    }
    return s;
  };

  NewtonResult res;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double f = kernel(beta);
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd info(p, p);
  for (int it = 0; it < max_iter; ++it) {
    grad.setZero();
    info.setZero();
    for (std::size_t d = 0; d < data.size(); ++d) {
      if (w[d] == 0.0) continue;
      const Dataset& ds = data[d];
      Eigen::VectorXd eta = ds.X * beta;
      Eigen::VectorXd u(eta.size()), c(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        double e = eta[i], y = ds.y[i];
        switch (endpoint.family) {
          case Family::Bernoulli:
          case Family::Binomial: {
            double m = 1.0 / (1.0 + std::exp(-e));
            u[i] = y - ds.trials[i] * m;
            c[i] = ds.trials[i] * m * (1.0 - m);
            break;
          }
          case Family::Poisson: {
            double m = std::exp(e);
            u[i] = y - m;
            c[i] = m;
            break;
          }
          case Family::Exponential: {
            double m = std::exp(e);
            u[i] = 1.0 - y * m;
            c[i] = y * m;
            break;
          }
          default:
            break;
        }
      }
      grad += w[d] * (ds.X.transpose() * u);
      info += w[d] * (ds.X.transpose() * c.asDiagonal() * ds.X);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      res.mode = beta;
      res.converged = false;
      res.iterations = it;
      return res;
    }
    Eigen::VectorXd step = llt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd cand;
    double fc = -kInf;
    for (int h = 0; h < 40; ++h) {
      cand = beta + scale * step;
      fc = kernel(cand);
      if (fc >= f - 1e-12) break;
      scale *= 0.5;
    }
    if (!(fc >= f - 1e-12)) {
      res.mode = beta;
      res.converged = false;
      res.iterations = it;
      return res;
    }
    double move = (cand - beta).cwiseAbs().maxCoeff();
    beta = cand;
    f = fc;
    if (grad.cwiseAbs().maxCoeff() < 1e-7 || move < 1e-11) {
      res.mode = beta;
      res.cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
      res.converged = true;
      res.iterations = it + 1;
      return res;
    }
  }
  res.mode = beta;
  res.converged = false;
  res.iterations = max_iter;
  return res;
}

}  // namespace ppd
