#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppd/design.hpp"
#include "ppd/glm.hpp"
#include "ppd/model.hpp"
#include "ppd/norm_const.hpp"
#include "ppd/two_group.hpp"

namespace py = pybind11;
using namespace ppd;

namespace {

Family parse_family(const std::string& s) {
  auto f = family_from_name(s);
  if (!f) throw std::invalid_argument("unknown family '" + s + "'");
  return *f;
}

EndpointSpec parse_endpoint(const std::string& family, const std::string& link) {
  EndpointSpec e;
  e.family = parse_family(family);
  if (link.empty()) {
    e.link = canonical_link(e.family);
  } else {
    auto l = link_from_name(link);
    if (!l) throw std::invalid_argument("unknown link '" + link + "'");
    e.link = *l;
  }
  if (!link_allowed(e.family, e.link))
    throw std::invalid_argument("link not supported for this family");
  return e;
}

std::vector<HistoricalSet> two_group_historical(const py::list& historical) {
  std::vector<HistoricalSet> out;
  for (const auto& item : historical) {
    py::dict d = item.cast<py::dict>();
    HistoricalSet h;
    TwoGroupSummary s;
    s.y_sum = d["y_sum"].cast<double>();
    s.n = d["n"].cast<long>();
    if (d.contains("v")) s.v = d["v"].cast<double>();
    h.payload = s;
    if (d.contains("a0")) h.a0 = d["a0"].cast<double>();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<HistoricalSet> glm_historical(const py::list& historical) {
  std::vector<HistoricalSet> out;
  for (const auto& item : historical) {
    py::dict d = item.cast<py::dict>();
    HistoricalSet h;
    GlmData g;
    g.y = d["y0"].cast<Eigen::VectorXd>();
    g.X = d["x0"].cast<Eigen::MatrixXd>();
    if (d.contains("trials")) g.trials = d["trials"].cast<Eigen::VectorXd>();
    h.payload = std::move(g);
    if (d.contains("a0")) h.a0 = d["a0"].cast<double>();
    out.push_back(std::move(h));
  }
  return out;
}

PriorSpec make_prior(double mt1, double mt2, double mc1, double mc2, double a1, double a2) {
  PriorSpec p;
  p.mu_t_shape1 = mt1;
  p.mu_t_shape2 = mt2;
  p.mu_c_shape1 = mc1;
  p.mu_c_shape2 = mc2;
  p.a0_shape1 = a1;
  p.a0_shape2 = a2;
  return p;
}

std::vector<SliceConfig> slice_from(const std::optional<std::vector<double>>& lower,
                                    const std::optional<std::vector<double>>& upper,
                                    const std::optional<std::vector<double>>& width,
                                    const SliceConfig& fill) {
  std::size_t n = 0;
  if (lower) n = std::max(n, lower->size());
  if (upper) n = std::max(n, upper->size());
  if (width) n = std::max(n, width->size());
  std::vector<SliceConfig> out(n, fill);
  for (std::size_t i = 0; i < n; ++i) {
    if (lower && i < lower->size()) out[i].lower = (*lower)[i];
    if (upper && i < upper->size()) out[i].upper = (*upper)[i];
    if (width && i < width->size()) out[i].width = (*width)[i];
  }
  return out;
}

py::dict two_group_result(const TwoGroupPosterior& post) {
  py::dict out;
  Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(
      post.mu_c_draws.data(), static_cast<Eigen::Index>(post.mu_c_draws.size()));
  out["mu_c"] = mu;
  if (post.tau_draws.size() > 0) out["tau"] = post.tau_draws;
  if (post.a0_draws.size() > 0) out["a0"] = post.a0_draws;
  if (post.conjugate) {
    out["conjugate"] =
        py::make_tuple(post.conjugate->kind == ConjugateForm::Kind::Beta ? "beta" : "gamma",
                       post.conjugate->shape1, post.conjugate->shape2);
  }
  return out;
}

py::dict glm_result(const GlmPosterior& post) {
  py::dict out;
  out["beta"] = post.beta_draws;
  if (post.tau_draws.size() > 0) out["tau"] = post.tau_draws;
  if (post.a0_draws.size() > 0) out["a0"] = post.a0_draws;
  return out;
}

py::dict oc_result(const OperatingCharacteristic& oc) {
  py::dict out;
  out["power"] = oc.estimate;
  out["mc_stderr"] = oc.mc_stderr;
  out["rejections"] = oc.rejections;
  out["trials"] = oc.trials;
  if (!oc.average_posterior_means.empty())
    out["average_posterior_means"] = oc.average_posterior_means;
  if (oc.excluded > 0) out["excluded"] = oc.excluded;
  return out;
}

NormConstSurface surface_from(const py::dict& d) {
  NormConstSurface s;
  s.coefficients = d["coefficients"].cast<Eigen::VectorXd>();
  s.degree = d["degree"].cast<int>();
  s.r_squared = d["r_squared"].cast<double>();
  s.hull_min = d["hull_min"].cast<Eigen::VectorXd>();
  s.hull_max = d["hull_max"].cast<Eigen::VectorXd>();
  if (d.contains("fingerprint")) s.fingerprint = d["fingerprint"].cast<std::string>();
  return s;
}

py::dict surface_to(const NormConstSurface& s) {
  py::dict out;
  out["coefficients"] = s.coefficients;
  out["degree"] = s.degree;
  out["r_squared"] = s.r_squared;
  out["hull_min"] = s.hull_min;
  out["hull_max"] = s.hull_max;
  out["fingerprint"] = s.fingerprint;
  return out;
}

}  // namespace

PYBIND11_MODULE(pyppd, m) {
  m.doc() = "Bayesian analysis and sample size determination with power priors";
  m.attr("__version__") = PPD_VERSION;

  m.def(
      "link_eval",
      [](const std::string& link, double eta) {
        auto l = link_from_name(link);
        if (!l) throw std::invalid_argument("unknown link '" + link + "'");
        return link_eval(*l, eta);
      },
      py::arg("link"), py::arg("eta"), "Inverse link: mean-scale value of a linear predictor");

  m.def(
      "canonical_link",
      [](const std::string& family) {
        return std::string(link_name(canonical_link(parse_family(family))));
      },
      py::arg("family"));

  m.def(
      "two_grp_fixed_a0",
      [](const std::string& family, double y_c, long n_c, std::optional<double> v_c,
         const py::list& historical, double prior_mu_c_shape1, double prior_mu_c_shape2,
         long nMC, long nBI, std::uint64_t seed) {
        EndpointSpec e = parse_endpoint(family, "");
        TwoGroupSummary cur{y_c, n_c, v_c};
        PriorSpec p = make_prior(1, 1, prior_mu_c_shape1, prior_mu_c_shape2, 1, 1);
        RngStream rng(seed, 0);
        return two_group_result(
            fit_two_group_fixed_a0(e, cur, two_group_historical(historical), p, nMC, nBI, rng));
      },
      py::arg("family"), py::arg("y_c"), py::arg("n_c"), py::arg("v_c") = std::nullopt,
      py::arg("historical") = py::list(), py::arg("prior_mu_c_shape1") = 1.0,
      py::arg("prior_mu_c_shape2") = 1.0, py::arg("nMC") = 10000, py::arg("nBI") = 250,
      py::arg("seed") = 0,
      "Power-prior posterior of the control parameter with fixed a0 weights");

  m.def(
      "two_grp_random_a0",
      [](const std::string& family, double y_c, long n_c, std::optional<double> v_c,
         const py::list& historical, double prior_mu_c_shape1, double prior_mu_c_shape2,
         double prior_a0_shape1, double prior_a0_shape2, std::optional<std::vector<double>> lower,
         std::optional<std::vector<double>> upper, std::optional<std::vector<double>> width,
         long nMC, long nBI, std::uint64_t seed) {
        EndpointSpec e = parse_endpoint(family, "");
        TwoGroupSummary cur{y_c, n_c, v_c};
        PriorSpec p = make_prior(1, 1, prior_mu_c_shape1, prior_mu_c_shape2, prior_a0_shape1,
                                 prior_a0_shape2);
        RngStream rng(seed, 0);
        auto cfg = slice_from(lower, upper, width, a0_slice_defaults());
        return two_group_result(fit_two_group_random_a0(e, cur, two_group_historical(historical),
                                                        p, cfg, nMC, nBI, rng));
      },
      py::arg("family"), py::arg("y_c"), py::arg("n_c"), py::arg("v_c") = std::nullopt,
      py::arg("historical") = py::list(), py::arg("prior_mu_c_shape1") = 1.0,
      py::arg("prior_mu_c_shape2") = 1.0, py::arg("prior_a0_shape1") = 1.0,
      py::arg("prior_a0_shape2") = 1.0, py::arg("lower_limits") = std::nullopt,
      py::arg("upper_limits") = std::nullopt, py::arg("slice_widths") = std::nullopt,
      py::arg("nMC") = 10000, py::arg("nBI") = 250, py::arg("seed") = 0,
      "Normalized-power-prior posterior of the control parameter with random a0");

  m.def(
      "glm_fixed_a0",
      [](const std::string& family, const std::string& link, std::optional<Eigen::VectorXd> y,
         std::optional<Eigen::MatrixXd> x, std::optional<Eigen::VectorXd> trials,
         const py::list& historical, bool current, std::optional<std::vector<double>> lower,
         std::optional<std::vector<double>> upper, std::optional<std::vector<double>> width,
         long nMC, long nBI, std::uint64_t seed) {
        EndpointSpec e = parse_endpoint(family, link);
        std::optional<GlmData> cur;
        if (y) cur = GlmData{*y, x ? *x : Eigen::MatrixXd(y->size(), 0), trials};
        GlmOptions opts;
        opts.nMC = nMC;
        opts.nBI = nBI;
        opts.include_current = current && cur.has_value();
        opts.beta_slice = slice_from(lower, upper, width, beta_slice_defaults());
        RngStream rng(seed, 0);
        auto hist = glm_historical(historical);
        return glm_result(fit_glm_fixed_a0(e, cur ? &*cur : nullptr, hist, opts, rng));
      },
      py::arg("family"), py::arg("link") = "", py::arg("y") = std::nullopt,
      py::arg("x") = std::nullopt, py::arg("trials") = std::nullopt,
      py::arg("historical") = py::list(), py::arg("current") = true,
      py::arg("lower_limits") = std::nullopt, py::arg("upper_limits") = std::nullopt,
      py::arg("slice_widths") = std::nullopt, py::arg("nMC") = 10000, py::arg("nBI") = 250,
      py::arg("seed") = 0, "Power-prior GLM fit with fixed a0 weights");

  m.def(
      "glm_random_a0",
      [](const std::string& family, const std::string& link, std::optional<Eigen::VectorXd> y,
         std::optional<Eigen::MatrixXd> x, std::optional<Eigen::VectorXd> trials,
         const py::list& historical, std::optional<py::dict> surface, double prior_a0_shape1,
         double prior_a0_shape2, std::optional<std::vector<double>> lower,
         std::optional<std::vector<double>> upper, std::optional<std::vector<double>> width,
         long nMC, long nBI, std::uint64_t seed) {
        EndpointSpec e = parse_endpoint(family, link);
        std::optional<GlmData> cur;
        if (y) cur = GlmData{*y, x ? *x : Eigen::MatrixXd(y->size(), 0), trials};
        GlmOptions opts;
        opts.nMC = nMC;
        opts.nBI = nBI;
        opts.beta_slice = slice_from(lower, upper, width, beta_slice_defaults());
        PriorSpec p = make_prior(1, 1, 1, 1, prior_a0_shape1, prior_a0_shape2);
        std::optional<NormConstSurface> s;
        if (surface) s = surface_from(*surface);
        RngStream rng(seed, 0);
        auto hist = glm_historical(historical);
        return glm_result(
            fit_glm_random_a0(e, cur ? &*cur : nullptr, hist, p, s ? &*s : nullptr, opts, rng));
      },
      py::arg("family"), py::arg("link") = "", py::arg("y") = std::nullopt,
      py::arg("x") = std::nullopt, py::arg("trials") = std::nullopt,
      py::arg("historical") = py::list(), py::arg("surface") = std::nullopt,
      py::arg("prior_a0_shape1") = 1.0, py::arg("prior_a0_shape2") = 1.0,
      py::arg("lower_limits") = std::nullopt, py::arg("upper_limits") = std::nullopt,
      py::arg("slice_widths") = std::nullopt, py::arg("nMC") = 10000, py::arg("nBI") = 250,
      py::arg("seed") = 0, "Normalized-power-prior GLM fit with random a0");

  m.def(
      "normalizing_constant",
      [](const Eigen::MatrixXd& grid, const py::list& historical, const std::string& family,
         const std::string& link, long nMC, long nBI, int rings, std::uint64_t seed,
         int workers) {
        EndpointSpec e = parse_endpoint(family, link);
        SurfaceFitOptions opts;
        opts.nMC = nMC;
        opts.nBI = nBI;
        opts.rings = rings;
        opts.workers = workers;
        RngStream rng(seed, 0);
        return surface_to(fit_surface(A0Grid{grid}, e, glm_historical(historical), opts, rng));
      },
      py::arg("grid"), py::arg("historical"), py::arg("family"), py::arg("link") = "",
      py::arg("nMC") = 10000, py::arg("nBI") = 250, py::arg("rings") = 20, py::arg("seed") = 0,
      py::arg("workers") = 1,
      "Fit the polynomial surface approximating the log normalizing constant over an a0 grid");

  m.def(
      "pwk_log_c",
      [](const Eigen::MatrixXd& samples,
         const std::function<double(Eigen::VectorXd)>& log_kernel, int rings) {
        return pwk_log_c(
            samples, [&](const Eigen::VectorXd& x) { return log_kernel(x); }, rings);
      },
      py::arg("samples"), py::arg("log_kernel"), py::arg("rings") = 20,
      "Partition-weighted-kernel estimate of a log normalizing constant");

  m.def(
      "power_two_grp_fixed_a0",
      [](const std::string& family, long n_t, long n_c, const py::list& historical,
         const Eigen::VectorXd& samp_prior_mu_t, const Eigen::VectorXd& samp_prior_mu_c,
         std::optional<std::vector<double>> samp_prior_var_t,
         std::optional<std::vector<double>> samp_prior_var_c, double prior_mu_t_shape1,
         double prior_mu_t_shape2, double prior_mu_c_shape1, double prior_mu_c_shape2,
         double delta, double gamma, long N, long nMC, long nBI, std::uint64_t seed,
         int workers) {
        TwoGroupDesign d;
        d.endpoint = parse_endpoint(family, "");
        d.design.delta = delta;
        d.design.gamma = gamma;
        d.design.N = N;
        d.design.n_t = n_t;
        d.design.n_c = n_c;
        d.design.nMC = nMC;
        d.design.nBI = nBI;
        d.historical = two_group_historical(historical);
        d.prior = make_prior(prior_mu_t_shape1, prior_mu_t_shape2, prior_mu_c_shape1,
                             prior_mu_c_shape2, 1, 1);
        d.samp_t.draws = samp_prior_mu_t;
        d.samp_c.draws = samp_prior_mu_c;
        if (samp_prior_var_t) d.samp_t.variance_draws = *samp_prior_var_t;
        if (samp_prior_var_c) d.samp_c.variance_draws = *samp_prior_var_c;
        d.a0_mode = A0Mode::Fixed;
        return oc_result(power_two_group(d, seed, workers));
      },
      py::arg("family"), py::arg("n_t"), py::arg("n_c"), py::arg("historical"),
      py::arg("samp_prior_mu_t"), py::arg("samp_prior_mu_c"),
      py::arg("samp_prior_var_t") = std::nullopt, py::arg("samp_prior_var_c") = std::nullopt,
      py::arg("prior_mu_t_shape1") = 1.0, py::arg("prior_mu_t_shape2") = 1.0,
      py::arg("prior_mu_c_shape1") = 1.0, py::arg("prior_mu_c_shape2") = 1.0,
      py::arg("delta") = 0.0, py::arg("gamma") = 0.95, py::arg("N") = 10000,
      py::arg("nMC") = 10000, py::arg("nBI") = 250, py::arg("seed") = 0, py::arg("workers") = 1,
      "Bayesian power / type I error for a two-group design with fixed a0");

  m.def(
      "power_two_grp_random_a0",
      [](const std::string& family, long n_t, long n_c, const py::list& historical,
         const Eigen::VectorXd& samp_prior_mu_t, const Eigen::VectorXd& samp_prior_mu_c,
         std::optional<std::vector<double>> samp_prior_var_t,
         std::optional<std::vector<double>> samp_prior_var_c, double prior_mu_t_shape1,
         double prior_mu_t_shape2, double prior_mu_c_shape1, double prior_mu_c_shape2,
         double prior_a0_shape1, double prior_a0_shape2, double delta, double gamma, long N,
         long nMC, long nBI, std::uint64_t seed, int workers) {
        TwoGroupDesign d;
        d.endpoint = parse_endpoint(family, "");
        d.design.delta = delta;
        d.design.gamma = gamma;
        d.design.N = N;
        d.design.n_t = n_t;
        d.design.n_c = n_c;
        d.design.nMC = nMC;
        d.design.nBI = nBI;
        d.historical = two_group_historical(historical);
        d.prior = make_prior(prior_mu_t_shape1, prior_mu_t_shape2, prior_mu_c_shape1,
                             prior_mu_c_shape2, prior_a0_shape1, prior_a0_shape2);
        d.samp_t.draws = samp_prior_mu_t;
        d.samp_c.draws = samp_prior_mu_c;
        if (samp_prior_var_t) d.samp_t.variance_draws = *samp_prior_var_t;
        if (samp_prior_var_c) d.samp_c.variance_draws = *samp_prior_var_c;
        d.a0_mode = A0Mode::Random;
        return oc_result(power_two_group(d, seed, workers));
      },
      py::arg("family"), py::arg("n_t"), py::arg("n_c"), py::arg("historical"),
      py::arg("samp_prior_mu_t"), py::arg("samp_prior_mu_c"),
      py::arg("samp_prior_var_t") = std::nullopt, py::arg("samp_prior_var_c") = std::nullopt,
      py::arg("prior_mu_t_shape1") = 1.0, py::arg("prior_mu_t_shape2") = 1.0,
      py::arg("prior_mu_c_shape1") = 1.0, py::arg("prior_mu_c_shape2") = 1.0,
      py::arg("prior_a0_shape1") = 1.0, py::arg("prior_a0_shape2") = 1.0, py::arg("delta") = 0.0,
      py::arg("gamma") = 0.95, py::arg("N") = 10000, py::arg("nMC") = 10000,
      py::arg("nBI") = 250, py::arg("seed") = 0, py::arg("workers") = 1,
      "Bayesian power / type I error for a two-group design with random a0");

  m.def(
      "power_glm",
      [](const std::string& family, const std::string& link, long data_size,
         const py::list& historical, std::optional<Eigen::MatrixXd> x_samples,
         const Eigen::MatrixXd& samp_prior_beta,
         std::optional<std::vector<double>> samp_prior_var, bool random_a0,
         std::optional<py::dict> surface, bool approximate, double prior_a0_shape1,
         double prior_a0_shape2, double delta, double gamma, long N, long nMC, long nBI,
         double treatment_allocation, std::uint64_t seed, int workers) {
        GlmDesign d;
        d.endpoint = parse_endpoint(family, link);
        d.design.delta = delta;
        d.design.gamma = gamma;
        d.design.N = N;
        d.design.data_size = data_size;
        d.design.nMC = nMC;
        d.design.nBI = nBI;
        d.historical = glm_historical(historical);
        d.x_samples = x_samples;
        d.samp_beta.draws = samp_prior_beta;
        if (samp_prior_var) d.samp_beta.variance_draws = *samp_prior_var;
        d.prior = make_prior(1, 1, 1, 1, prior_a0_shape1, prior_a0_shape2);
        d.a0_mode = random_a0 ? A0Mode::Random : A0Mode::Fixed;
        if (surface) d.surface = surface_from(*surface);
        d.treatment_allocation = treatment_allocation;
        return oc_result(approximate ? power_glm_approx(d, seed, workers)
                                     : power_glm(d, seed, workers));
      },
      py::arg("family"), py::arg("link") = "", py::arg("data_size") = 0,
      py::arg("historical") = py::list(), py::arg("x_samples") = std::nullopt,
      py::arg("samp_prior_beta") = Eigen::MatrixXd(), py::arg("samp_prior_var") = std::nullopt,
      py::arg("random_a0") = false, py::arg("surface") = std::nullopt,
      py::arg("approximate") = false, py::arg("prior_a0_shape1") = 1.0,
      py::arg("prior_a0_shape2") = 1.0, py::arg("delta") = 0.0, py::arg("gamma") = 0.95,
      py::arg("N") = 10000, py::arg("nMC") = 10000, py::arg("nBI") = 250,
      py::arg("treatment_allocation") = 0.5, py::arg("seed") = 0, py::arg("workers") = 1,
      "Bayesian power / type I error for a GLM design");
}
