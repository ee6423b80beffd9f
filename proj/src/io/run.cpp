#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "ppd/io.hpp"

namespace ppd::io {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSurfaceStreamBase = 1ull << 32;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double quantile_type7(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  if (x.empty()) return 0.0;
  double pos = p * static_cast<double>(x.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

json summarize_column(const std::string& name, std::vector<double> draws) {
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  double ss = 0.0;
  for (double v : draws) ss += (v - mean) * (v - mean);
  double sd = draws.size() > 1 ? std::sqrt(ss / static_cast<double>(draws.size() - 1)) : 0.0;
  return json{{"parameter", name},
              {"mean", mean},
              {"sd", sd},
              {"q2.5", quantile_type7(draws, 0.025)},
              {"q97.5", quantile_type7(draws, 0.975)}};
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, j);
  return v;
}

// ---- response recoding ------------------------------------------------------

void flip_two_group(TwoGroupSummary& s, Family f) {
  if (f == Family::Bernoulli || f == Family::Binomial)
    s.y_sum = static_cast<double>(s.n) - s.y_sum;
  else
    s.y_sum = -s.y_sum;
}

void apply_flip(RunConfig& cfg) {
  Family f = cfg.endpoint.family;
  auto flip_atoms = [&](std::optional<SamplingPrior>& sp) {
    if (!sp) return;
    if (f == Family::Bernoulli || f == Family::Binomial)
      sp->draws = (1.0 - sp->draws.array()).matrix();
    else
      sp->draws = -sp->draws;
  };
  if (cfg.model == ModelKind::TwoGroup) {
    if (f != Family::Bernoulli && f != Family::Binomial && f != Family::Normal)
      throw ConfigError("flip_responses is not defined for this endpoint family");
    if (cfg.current_two_group) flip_two_group(*cfg.current_two_group, f);
    for (auto& h : cfg.historical) flip_two_group(std::get<TwoGroupSummary>(h.payload), f);
    flip_atoms(cfg.samp_t);
    flip_atoms(cfg.samp_c);
    flip_atoms(cfg.null_samp_t);
    flip_atoms(cfg.null_samp_c);
    return;
  }
  // GLM: negating the coefficients matches the recoded responses only for
  // symmetric links.
  bool symmetric = f == Family::Normal ||
                   ((f == Family::Bernoulli || f == Family::Binomial) &&
                    (cfg.endpoint.link == Link::Logit || cfg.endpoint.link == Link::Probit));
  if (!symmetric)
    throw ConfigError("flip_responses requires a normal endpoint or a logit/probit link");
  auto flip_glm = [&](GlmData& d) {
    if (f == Family::Normal) {
      d.y = -d.y;
    } else {
      Eigen::VectorXd t = d.trials ? *d.trials : Eigen::VectorXd::Ones(d.y.size());
      d.y = t - d.y;
    }
  };
  if (cfg.current_glm) flip_glm(*cfg.current_glm);
  for (auto& h : cfg.historical) flip_glm(std::get<GlmData>(h.payload));
  if (cfg.samp_beta) cfg.samp_beta->draws = -cfg.samp_beta->draws;
  if (cfg.null_samp_beta) cfg.null_samp_beta->draws = -cfg.null_samp_beta->draws;
}

// ---- progress ---------------------------------------------------------------

ProgressFn make_progress(const RunConfig& cfg, std::ostream* out, const char* label) {
  if (cfg.quiet || out == nullptr) return {};
  auto last = std::make_shared<std::atomic<long>>(0);
  std::string tag(label);
  return [out, last, tag](long done, long total) {
    long pct = done * 100 / total;
    long bucket = pct / 5;
    long prev = last->load();
    while (bucket > prev) {
      if (last->compare_exchange_weak(prev, bucket)) {
        (*out) << tag << ": " << bucket * 5 << "% (" << done << "/" << total << ")\n";
        break;
      }
    }
  };
}

// ---- slice settings ---------------------------------------------------------

// Entries default to (0, 1, 0.1) where unspecified.
std::vector<SliceConfig> two_group_a0_slice(const RunConfig& cfg) {
  std::size_t n = std::max({cfg.slice.lower.size(), cfg.slice.upper.size(),
                            cfg.slice.width.size()});
  std::vector<SliceConfig> out;
  for (std::size_t i = 0; i < n; ++i) {
    SliceConfig c = a0_slice_defaults();
    if (i < cfg.slice.lower.size()) c.lower = cfg.slice.lower[i];
    if (i < cfg.slice.upper.size()) c.upper = cfg.slice.upper[i];
    if (i < cfg.slice.width.size()) c.width = cfg.slice.width[i];
    out.push_back(c);
  }
  return out;
}

void split_glm_slice(const RunConfig& cfg, Eigen::Index p, std::size_t K,
                     std::vector<SliceConfig>& beta, std::vector<SliceConfig>& a0) {
  beta.clear();
  a0.clear();
  for (Eigen::Index i = 0; i < p; ++i) {
    SliceConfig c = beta_slice_defaults();
    auto idx = static_cast<std::size_t>(i);
    if (idx < cfg.slice.lower.size()) c.lower = cfg.slice.lower[idx];
    if (idx < cfg.slice.upper.size()) c.upper = cfg.slice.upper[idx];
    if (idx < cfg.slice.width.size()) c.width = cfg.slice.width[idx];
    beta.push_back(c);
  }
  for (std::size_t k = 0; k < K; ++k) {
    SliceConfig c = a0_slice_defaults();
    std::size_t idx = static_cast<std::size_t>(p) + k;
    if (idx < cfg.slice.lower.size()) c.lower = cfg.slice.lower[idx];
    if (idx < cfg.slice.upper.size()) c.upper = cfg.slice.upper[idx];
    if (idx < cfg.slice.width.size()) c.width = cfg.slice.width[idx];
    a0.push_back(c);
  }
}

// ---- surface handling -------------------------------------------------------

NormConstSurface load_surface_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open surface file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("surface file '" + path + "' is not valid JSON: " + e.what());
  }
  if (j.contains("results") && j.at("results").contains("surface"))
    j = j.at("results").at("surface");
  return j.get<NormConstSurface>();
}

void save_surface_file(const NormConstSurface& s, const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << json(s).dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

NormConstSurface fit_surface_from_config(const RunConfig& cfg, std::map<std::string, double>& timings) {
  if (!cfg.surface.grid)
    throw ConfigError("surface.grid required (no fitted surface was supplied or cached)");
  Timer t;
  SurfaceFitOptions opts;
  opts.nMC = cfg.surface.nMC;
  opts.nBI = cfg.surface.nBI;
  opts.rings = cfg.surface.rings;
  opts.workers = cfg.workers;
  RngStream rng(cfg.seed, kSurfaceStreamBase);
  NormConstSurface s = fit_surface(A0Grid{*cfg.surface.grid}, cfg.endpoint, cfg.historical, opts, rng);
  timings["surface_fit_s"] = t.seconds();
  return s;
}

NormConstSurface resolve_surface(const RunConfig& cfg, std::map<std::string, double>& timings) {
  std::string fp = historical_fingerprint(cfg.endpoint, cfg.historical);
  if (cfg.surface.path && std::filesystem::exists(*cfg.surface.path)) {
    NormConstSurface s = load_surface_file(*cfg.surface.path);
    if (!s.fingerprint.empty() && s.fingerprint != fp)
      throw ConfigError("surface file '" + *cfg.surface.path +
                        "' was fitted for different historical data");
    return s;
  }
  if (cfg.surface.cache_dir) {
    std::string cached = (std::filesystem::path(*cfg.surface.cache_dir) / (fp + ".json")).string();
    if (std::filesystem::exists(cached)) return load_surface_file(cached);
    NormConstSurface s = fit_surface_from_config(cfg, timings);
    save_surface_file(s, cached);
    return s;
  }
  NormConstSurface s = fit_surface_from_config(cfg, timings);
  if (cfg.surface.path) save_surface_file(s, *cfg.surface.path);
  return s;
}

// ---- commands ---------------------------------------------------------------

json run_analyze(const RunConfig& cfg, std::map<std::string, double>& timings) {
  RngStream rng(cfg.seed, 0);
  json params = json::array();
  Timer t;
  if (cfg.model == ModelKind::TwoGroup) {
    TwoGroupSummary current = cfg.current_two_group.value_or(TwoGroupSummary{0.0, 0, {}});
    TwoGroupPosterior post;
    if (cfg.a0_mode == A0Mode::Fixed) {
      post = fit_two_group_fixed_a0(cfg.endpoint, current, cfg.historical, cfg.prior,
                                    cfg.design.nMC, cfg.design.nBI, rng);
    } else {
      post = fit_two_group_random_a0(cfg.endpoint, current, cfg.historical, cfg.prior,
                                     two_group_a0_slice(cfg), cfg.design.nMC, cfg.design.nBI, rng);
    }
    params.push_back(summarize_column("mu_c", post.mu_c_draws));
    for (Eigen::Index j = 0; j < post.tau_draws.cols(); ++j) {
      std::string name = j == 0 ? "tau_c" : "tau_c0" + std::to_string(j);
      params.push_back(summarize_column(name, column(post.tau_draws, j)));
    }
    for (Eigen::Index j = 0; j < post.a0_draws.cols(); ++j)
      params.push_back(summarize_column("a0_" + std::to_string(j + 1), column(post.a0_draws, j)));
  } else {
    const GlmData* current = nullptr;
    if (cfg.include_current) {
      if (!cfg.current_glm) throw ConfigError("analyze with include_current needs 'data'");
      current = &*cfg.current_glm;
    }
    GlmOptions opts;
    opts.nMC = cfg.design.nMC;
    opts.nBI = cfg.design.nBI;
    opts.include_current = cfg.include_current;
    Eigen::Index p = cfg.include_current && cfg.current_glm ? cfg.current_glm->X.cols() + 1
                     : cfg.historical.empty() ? 1
                                              : cfg.historical.front().glm().X.cols() + 1;
    std::vector<SliceConfig> bs, as;
    split_glm_slice(cfg, p, cfg.historical.size(), bs, as);
    opts.beta_slice = bs;
    opts.a0_slice = as;
    GlmPosterior post;
    std::optional<NormConstSurface> surface;
    if (cfg.a0_mode == A0Mode::Fixed) {
      post = fit_glm_fixed_a0(cfg.endpoint, current, cfg.historical, opts, rng);
    } else {
      if (cfg.endpoint.family != Family::Normal) surface = resolve_surface(cfg, timings);
      post = fit_glm_random_a0(cfg.endpoint, current, cfg.historical, cfg.prior,
                               surface ? &*surface : nullptr, opts, rng);
    }
    for (Eigen::Index j = 0; j < post.beta_draws.cols(); ++j)
      params.push_back(summarize_column("beta_" + std::to_string(j), column(post.beta_draws, j)));
    for (Eigen::Index j = 0; j < post.tau_draws.cols(); ++j) {
      std::string name = j == 0 ? "tau" : "tau_" + std::to_string(j);
      params.push_back(summarize_column(name, column(post.tau_draws, j)));
    }
    for (Eigen::Index j = 0; j < post.a0_draws.cols(); ++j)
      params.push_back(summarize_column("a0_" + std::to_string(j + 1), column(post.a0_draws, j)));
  }
  timings["fit_s"] = t.seconds();
  return json{{"posterior", params}};
}

TwoGroupDesign build_two_group_design(const RunConfig& cfg, bool null_mass) {
  TwoGroupDesign d;
  d.endpoint = cfg.endpoint;
  d.design = cfg.design;
  d.historical = cfg.historical;
  d.prior = cfg.prior;
  d.a0_mode = cfg.a0_mode;
  d.a0_slice = two_group_a0_slice(cfg);
  const auto& st = null_mass ? cfg.null_samp_t : cfg.samp_t;
  const auto& sc = null_mass ? cfg.null_samp_c : cfg.samp_c;
  if (!st || !sc)
    throw ConfigError(null_mass ? "null_sampling_prior required" : "sampling_prior required");
  d.samp_t = *st;
  d.samp_c = *sc;
  return d;
}

GlmDesign build_glm_design(const RunConfig& cfg, bool null_mass,
                           const std::optional<NormConstSurface>& surface) {
  GlmDesign d;
  d.endpoint = cfg.endpoint;
  d.design = cfg.design;
  d.historical = cfg.historical;
  d.x_samples = cfg.x_samples;
  d.prior = cfg.prior;
  d.a0_mode = cfg.a0_mode;
  d.surface = surface;
  d.treatment_allocation = cfg.treatment_allocation;
  const auto& sb = null_mass ? cfg.null_samp_beta : cfg.samp_beta;
  if (!sb)
    throw ConfigError(null_mass ? "null_sampling_prior required" : "sampling_prior required");
  d.samp_beta = *sb;
  Eigen::Index p = d.samp_beta.draws.cols();
  split_glm_slice(cfg, p, cfg.historical.size(), d.beta_slice, d.a0_slice);
  return d;
}

json run_design(const RunConfig& cfg, std::map<std::string, double>& timings, std::ostream* out) {
  Timer t;
  OperatingCharacteristic oc;
  if (cfg.model == ModelKind::TwoGroup) {
    oc = power_two_group(build_two_group_design(cfg, false), cfg.seed, cfg.workers,
                         make_progress(cfg, out, "design"));
  } else {
    std::optional<NormConstSurface> surface;
    if (cfg.a0_mode == A0Mode::Random && cfg.endpoint.family != Family::Normal)
      surface = resolve_surface(cfg, timings);
    GlmDesign d = build_glm_design(cfg, false, surface);
    oc = cfg.approximate ? power_glm_approx(d, cfg.seed, cfg.workers,
                                            make_progress(cfg, out, "design"))
                         : power_glm(d, cfg.seed, cfg.workers, make_progress(cfg, out, "design"));
  }
  timings["design_s"] = t.seconds();
  return json{{"operating_characteristic", oc}};
}

json run_normconst(const RunConfig& cfg, std::map<std::string, double>& timings) {
  if (cfg.model != ModelKind::Glm)
    throw ConfigError("normconst fits GLM surfaces; set model to 'glm'");
  if (cfg.historical.empty()) throw ConfigError("normconst requires historical data");
  NormConstSurface s = fit_surface_from_config(cfg, timings);
  if (cfg.surface.cache_dir) {
    std::string cached =
        (std::filesystem::path(*cfg.surface.cache_dir) / (s.fingerprint + ".json")).string();
    save_surface_file(s, cached);
  }
  if (cfg.surface.path) save_surface_file(s, *cfg.surface.path);
  return json{{"surface", s}};
}

json run_find_n(const RunConfig& cfg, std::map<std::string, double>& timings, std::ostream* out) {
  Timer t;
  SampleSizeResult result;
  if (cfg.model == ModelKind::TwoGroup) {
    const auto& tg = cfg.find_n.n_t_grid;
    const auto& cg = cfg.find_n.n_c_grid;
    if (tg.empty() || tg.size() != cg.size())
      throw ConfigError("find_n needs matching n_t_grid and n_c_grid");
    std::vector<long> totals(tg.size());
    for (std::size_t i = 0; i < tg.size(); ++i) totals[i] = tg[i] + cg[i];
    auto evaluate = [&](long n, bool null_mass) {
      std::size_t i = 0;
      while (i < totals.size() && totals[i] != n) ++i;
      TwoGroupDesign d = build_two_group_design(cfg, null_mass);
      d.design.n_t = tg[i];
      d.design.n_c = cg[i];
      return power_two_group(d, cfg.seed, cfg.workers, {}).estimate;
    };
    result = find_sample_size(evaluate, cfg.find_n.alpha0, cfg.find_n.alpha1, totals);
  } else {
    if (cfg.find_n.data_size_grid.empty()) throw ConfigError("find_n needs data_size_grid");
    std::optional<NormConstSurface> surface;
    if (cfg.a0_mode == A0Mode::Random && cfg.endpoint.family != Family::Normal)
      surface = resolve_surface(cfg, timings);
    auto evaluate = [&](long n, bool null_mass) {
      GlmDesign d = build_glm_design(cfg, null_mass, surface);
      d.design.data_size = n;
      return (cfg.approximate ? power_glm_approx(d, cfg.seed, cfg.workers, {})
                              : power_glm(d, cfg.seed, cfg.workers, {}))
          .estimate;
    };
    result = find_sample_size(evaluate, cfg.find_n.alpha0, cfg.find_n.alpha1,
                              cfg.find_n.data_size_grid);
  }
  (void)out;
  timings["find_n_s"] = t.seconds();
  return json{{"sample_size", result}};
}

}  // namespace

json report_to_json(const RunReport& r) {
  return json{{"version", r.version},
              {"seed", r.seed},
              {"workers", r.workers},
              {"config_fingerprint", r.config_fingerprint},
              {"config", r.config},
              {"timings", r.timings},
              {"results", r.results}};
}

RunReport run(const RunConfig& cfg_in, std::ostream* progress) {
  RunConfig cfg = cfg_in;
  if (cfg.flip_responses) apply_flip(cfg);

  RunReport report;
  report.version = PPD_VERSION;
  report.seed = cfg.seed;
  report.workers = cfg.workers;
  report.config = normalize_config(cfg_in);
  report.config_fingerprint = config_fingerprint(cfg_in);

  Timer total;
  switch (cfg.command) {
    case Command::Analyze:
      report.results = run_analyze(cfg, report.timings);
      break;
    case Command::Design:
      report.results = run_design(cfg, report.timings, progress);
      break;
    case Command::NormConst:
      report.results = run_normconst(cfg, report.timings);
      break;
    case Command::FindN:
      report.results = run_find_n(cfg, report.timings, progress);
      break;
  }
  report.timings["total_s"] = total.seconds();
  if (!cfg.output.empty()) write_report(report, cfg.output);
  return report;
}

void write_report(const RunReport& r, const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
    out << report_to_json(r).dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ppd::io
