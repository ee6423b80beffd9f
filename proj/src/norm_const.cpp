#include "ppd/norm_const.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ppd/parallel.hpp"

namespace ppd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void rec_exponents(int k_vars, int remaining, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
  if (k_vars == 0) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur.push_back(e);
    rec_exponents(k_vars - 1, remaining - e, cur, out);
    cur.pop_back();
  }
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_double(std::uint64_t h, double x) {
  return fnv1a(h, &x, sizeof(double));
}

}  // namespace

std::vector<std::vector<int>> total_degree_exponents(int k_vars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  rec_exponents(k_vars, degree, cur, out);
  return out;
}

ValidationReport validate_a0_grid(const A0Grid& grid) {
  ValidationReport out;
  const Eigen::Index M = grid.values.rows();
  const Eigen::Index K = grid.values.cols();
  if (K < 1) out.push_back({"grid", "needs at least one column"});
  if (M < K + 2)
    out.push_back({"grid", "needs at least K+2 rows to fit a degree-1 polynomial"});
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < K; ++j) {
      double v = grid.values(i, j);
      if (!(v > 0.0 && v <= 1.0)) {
        out.push_back({"grid", "entries must lie in (0,1]"});
        i = M;
        break;
      }
      if (v < 0.01) {
        out.push_back({"grid", "near-zero grid values (< 0.01) are not allowed"});
        i = M;
        break;
      }
    }
  }
  for (Eigen::Index i = 0; i + 1 < M; ++i) {
    for (Eigen::Index j = i + 1; j < M; ++j) {
      if ((grid.values.row(i) - grid.values.row(j)).cwiseAbs().maxCoeff() == 0.0) {
        out.push_back({"grid", "duplicate rows " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1)});
        return out;
      }
    }
  }
  return out;
}

double pwk_log_c(const Eigen::MatrixXd& samples,
                 const std::function<double(const Eigen::VectorXd&)>& log_kernel, int rings) {
  const Eigen::Index M = samples.rows();
  const Eigen::Index d = samples.cols();
  if (M < 1000) throw std::invalid_argument("PWK needs at least 1000 posterior samples");
  if (d < 1) throw std::invalid_argument("PWK needs at least one dimension");
  if (rings < 1) throw std::invalid_argument("PWK needs at least one ring");

  std::vector<double> logq(M);
  long finite = 0;
  for (Eigen::Index m = 0; m < M; ++m) {
    logq[m] = log_kernel(samples.row(m).transpose());
    if (std::isfinite(logq[m])) ++finite;
  }
  if (finite < static_cast<long>(0.99 * static_cast<double>(M)))
    throw std::invalid_argument("kernel not finite at 99% of the samples");

  Eigen::RowVectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(M - 1);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("degenerate posterior sample (covariance not positive definite)");

  // Standardized radii; the working space is the ball holding the central
  // 99% of them.
  Eigen::MatrixXd z = llt.matrixL().solve(centered.transpose());  // d x M
  std::vector<double> radius(M);
  for (Eigen::Index m = 0; m < M; ++m) radius[m] = z.col(m).norm();
  std::vector<double> sorted = radius;
  auto cut = sorted.begin() + static_cast<std::ptrdiff_t>(0.99 * static_cast<double>(M - 1));
  std::nth_element(sorted.begin(), cut, sorted.end());
  const double R = *cut;
  if (!(R > 0.0)) throw std::runtime_error("degenerate posterior sample (zero radius spread)");

  std::vector<double> rep(rings, -kInf);
  std::vector<long> members(rings, 0);
  std::vector<int> shell_of(M, -1);
  for (Eigen::Index m = 0; m < M; ++m) {
    if (radius[m] >= R) continue;
    int i = std::min<int>(rings - 1, static_cast<int>(radius[m] / R * rings));
    shell_of[m] = i;
    if (std::isfinite(logq[m])) {
      ++members[i];
      rep[i] = std::max(rep[i], logq[m]);
    }
  }

  // Shell volumes of the standardized ball, empty shells merged into the
  // nearest inner occupied shell (outward for leading empties).
  const double log_cd = 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0);
  std::vector<double> vol(rings, 0.0);
  for (int i = 0; i < rings; ++i) {
    double r0 = R * i / rings, r1 = R * (i + 1) / rings;
    vol[i] = std::exp(log_cd) * (std::pow(r1, d) - std::pow(r0, d));
  }
  {
    int last = -1;
    double orphan = 0.0;
    for (int i = 0; i < rings; ++i) {
      if (members[i] > 0) {
        if (last < 0 && orphan > 0.0) {
          vol[i] += orphan;
          orphan = 0.0;
        }
        last = i;
      } else {
        if (last >= 0)
          vol[last] += vol[i];
        else
          orphan += vol[i];
        vol[i] = 0.0;
      }
    }
    if (last < 0) throw std::runtime_error("PWK working space is empty");
  }

  std::vector<double> den_terms;
  for (int i = 0; i < rings; ++i)
    if (members[i] > 0) den_terms.push_back(rep[i] + std::log(vol[i]));
  double log_den = log_sum_exp(den_terms);

  std::vector<double> num_terms;
  num_terms.reserve(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    int i = shell_of[m];
    if (i < 0 || !std::isfinite(logq[m])) continue;
    num_terms.push_back(rep[i] - logq[m]);
  }
  if (num_terms.empty()) throw std::runtime_error("PWK numerator is empty");
  double log_num = log_sum_exp(num_terms) - std::log(static_cast<double>(M));

  double log_det_L = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) log_det_L += std::log(llt.matrixL()(i, i));
  return (log_den - log_num) + log_det_L;
}

NormConstSurface fit_surface(const A0Grid& grid, const EndpointSpec& endpoint,
                             const std::vector<HistoricalSet>& historical,
                             const SurfaceFitOptions& opts, RngStream& rng) {
  if (endpoint.family == Family::Normal)
    throw std::invalid_argument("the normal family has an analytic normalizing constant");
  if (historical.empty()) throw std::invalid_argument("surface fit requires historical data");
  ValidationReport rep = validate_a0_grid(grid);
  if (static_cast<Eigen::Index>(historical.size()) != grid.values.cols())
    rep.push_back({"grid", "column count must equal the number of historical sets"});
  if (!rep.empty()) throw std::invalid_argument("invalid a0 grid: " + format_report(rep));

  const Eigen::Index M = grid.values.rows();
  Eigen::VectorXd d_vals(M);

  parallel_for(M, opts.workers, [&](long j) {
    RngStream row_rng(rng.seed(), rng.stream_id() + static_cast<std::uint64_t>(j));
    Eigen::VectorXd a0 = grid.values.row(j).transpose();
    GlmOptions go;
    go.nMC = opts.nMC;
    go.nBI = opts.nBI;
    go.beta_slice = opts.beta_slice;
    go.include_current = false;
    go.a0_override = a0;
    GlmPosterior post = fit_glm_fixed_a0(endpoint, nullptr, historical, go, row_rng);
    GlmKernel kernel(endpoint, nullptr, historical, a0, /*include_current=*/false);
    d_vals[j] = pwk_log_c(post.beta_draws,
                          [&](const Eigen::VectorXd& b) { return kernel(b); }, opts.rings);
  });

  NormConstSurface s = fit_polynomial_surface(grid.values, d_vals, opts.max_degree);
  s.fingerprint = historical_fingerprint(endpoint, historical);
  return s;
}

NormConstSurface fit_polynomial_surface(const Eigen::MatrixXd& grid, const Eigen::VectorXd& d,
                                        int max_degree, double residual_tol) {
  const Eigen::Index M = grid.rows();
  const Eigen::Index K = grid.cols();
  if (d.size() != M) throw std::invalid_argument("response length must match grid rows");
  double sst = (d.array() - d.mean()).square().sum();
  std::optional<NormConstSurface> best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int degree = 1; degree <= max_degree; ++degree) {
    auto exps = total_degree_exponents(static_cast<int>(K), degree);
    const Eigen::Index B = static_cast<Eigen::Index>(exps.size());
    if (B > M) break;
    Eigen::MatrixXd Phi(M, B);
    for (Eigen::Index i = 0; i < M; ++i) {
      for (Eigen::Index b = 0; b < B; ++b) {
        double v = 1.0;
        for (Eigen::Index k = 0; k < K; ++k) v *= std::pow(grid(i, k), exps[b][k]);
        Phi(i, b) = v;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
    if (qr.rank() < B)
      throw std::runtime_error(
          "some coefficients not defined because of singularities; try increasing or "
          "decreasing the number of rows in the grid");
    Eigen::VectorXd coef = qr.solve(d);
    Eigen::VectorXd resid = d - Phi * coef;
    double r2 = sst == 0.0 ? 1.0 : 1.0 - resid.squaredNorm() / sst;
    double max_res = resid.cwiseAbs().maxCoeff();
    if (r2 > 0.99 && max_res < best_res) {
      NormConstSurface s;
      s.coefficients = coef;
      s.degree = degree;
      s.r_squared = r2;
      s.hull_min = grid.colwise().minCoeff().transpose();
      s.hull_max = grid.colwise().maxCoeff().transpose();
      best = s;
      best_res = max_res;
      if (max_res <= residual_tol) return s;
    }
  }
  if (best) return *best;
  throw std::runtime_error("surface fit failed; enlarge grid or increase nMC");
}

double eval_surface(const NormConstSurface& surface, const Eigen::VectorXd& a0) {
  const Eigen::Index K = surface.hull_min.size();
  if (a0.size() != K) throw std::invalid_argument("surface evaluated at wrong dimension");
  for (Eigen::Index k = 0; k < K; ++k) {
    if (a0[k] < surface.hull_min[k] || a0[k] > surface.hull_max[k])
      throw std::domain_error("surface extrapolation: a0 outside the fitted grid hull");
  }
  auto exps = total_degree_exponents(static_cast<int>(K), surface.degree);
  if (static_cast<Eigen::Index>(exps.size()) != surface.coefficients.size())
    throw std::invalid_argument("surface coefficient count does not match its degree");
  double v = 0.0;
  for (std::size_t b = 0; b < exps.size(); ++b) {
    double term = surface.coefficients[static_cast<Eigen::Index>(b)];
    for (Eigen::Index k = 0; k < K; ++k) term *= std::pow(a0[k], exps[b][k]);
    v += term;
  }
  return v;
}

std::string historical_fingerprint(const EndpointSpec& endpoint,
                                   const std::vector<HistoricalSet>& historical) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix_int = [&](std::uint64_t x) { h = fnv1a(h, &x, sizeof(x)); };
  mix_int(static_cast<std::uint64_t>(endpoint.family));
  mix_int(static_cast<std::uint64_t>(endpoint.link));
  mix_int(historical.size());
  for (const auto& set : historical) {
    if (set.is_two_group()) {
      const TwoGroupSummary& s = set.two_group();
      mix_int(1);
      h = fnv1a_double(h, s.y_sum);
      mix_int(static_cast<std::uint64_t>(s.n));
      h = fnv1a_double(h, s.v.value_or(-1.0));
    } else {
      const GlmData& g = set.glm();
      mix_int(2);
      mix_int(static_cast<std::uint64_t>(g.y.size()));
      mix_int(static_cast<std::uint64_t>(g.X.cols()));
      for (Eigen::Index i = 0; i < g.y.size(); ++i) h = fnv1a_double(h, g.y[i]);
      for (Eigen::Index j = 0; j < g.X.cols(); ++j)
        for (Eigen::Index i = 0; i < g.X.rows(); ++i) h = fnv1a_double(h, g.X(i, j));
      if (g.trials)
        for (Eigen::Index i = 0; i < g.trials->size(); ++i) h = fnv1a_double(h, (*g.trials)[i]);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace ppd
