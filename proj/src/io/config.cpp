#include <filesystem>

#include "ppd/io.hpp"

namespace ppd::io {

using nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Design: return "design";
    case Command::NormConst: return "normconst";
    case Command::FindN: return "find-n";
  }
  return "?";
}

namespace {

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  std::string unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) unknown += (unknown.empty() ? "" : ", ") + it.key();
  }
  if (!unknown.empty()) throw ConfigError(path + ": unknown keys: " + unknown);
}

template <class T>
T require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <class T>
T value_or(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / fp).string();
}

SamplingPrior parse_sampling_prior(const json& j, const std::string& path, ModelKind model,
                                   bool treatment_side) {
  check_keys(j, path, {"mu_t", "mu_c", "var_t", "var_c", "beta", "var"});
  SamplingPrior sp;
  if (model == ModelKind::TwoGroup) {
    const char* mu_key = treatment_side ? "mu_t" : "mu_c";
    const char* var_key = treatment_side ? "var_t" : "var_c";
    auto mu = require<std::vector<double>>(j, path, mu_key);
    sp.draws.resize(static_cast<Eigen::Index>(mu.size()), 1);
    for (std::size_t i = 0; i < mu.size(); ++i) sp.draws(static_cast<Eigen::Index>(i), 0) = mu[i];
    if (j.contains(var_key)) sp.variance_draws = j.at(var_key).get<std::vector<double>>();
  } else {
    if (!j.contains("beta")) throw ConfigError(path + ": missing required key 'beta'");
    sp.draws = matrix_from_json(j.at("beta"), path + ".beta");
    if (j.contains("var")) sp.variance_draws = j.at("var").get<std::vector<double>>();
  }
  return sp;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("command")) throw ConfigError("command required");
  check_keys(j, "config",
             {"command", "model", "endpoint", "a0_mode", "seed", "workers", "output", "quiet",
              "flip_responses", "treatment_allocation", "include_current", "current", "data",
              "historical", "prior", "mcmc", "design", "sampling_prior", "null_sampling_prior",
              "x_samples", "slice", "approximate", "surface", "find_n"});

  RunConfig cfg;
  std::string cmd = require<std::string>(j, "config", "command");
  if (cmd == "analyze")
    cfg.command = Command::Analyze;
  else if (cmd == "design")
    cfg.command = Command::Design;
  else if (cmd == "normconst")
    cfg.command = Command::NormConst;
  else if (cmd == "find-n")
    cfg.command = Command::FindN;
  else
    throw ConfigError("unknown command '" + cmd + "'");

  std::string model = value_or<std::string>(j, "config", "model", "two-group");
  if (model == "two-group")
    cfg.model = ModelKind::TwoGroup;
  else if (model == "glm")
    cfg.model = ModelKind::Glm;
  else
    throw ConfigError("model must be 'two-group' or 'glm'");

  if (!j.contains("endpoint")) throw ConfigError("endpoint required");
  check_keys(j.at("endpoint"), "endpoint", {"family", "link"});
  cfg.endpoint = j.at("endpoint").get<EndpointSpec>();

  std::string mode = value_or<std::string>(j, "config", "a0_mode", "fixed");
  if (mode == "fixed")
    cfg.a0_mode = A0Mode::Fixed;
  else if (mode == "random")
    cfg.a0_mode = A0Mode::Random;
  else
    throw ConfigError("a0_mode must be 'fixed' or 'random'");

  cfg.seed = value_or<std::uint64_t>(j, "config", "seed", 0);
  cfg.workers = value_or<int>(j, "config", "workers", 1);
  if (cfg.workers < 1) throw ConfigError("workers must be positive");
  cfg.output = value_or<std::string>(j, "config", "output", "");
  cfg.quiet = value_or<bool>(j, "config", "quiet", false);
  cfg.flip_responses = value_or<bool>(j, "config", "flip_responses", false);
  cfg.approximate = value_or<bool>(j, "config", "approximate", false);
  cfg.include_current = value_or<bool>(j, "config", "include_current", true);
  cfg.treatment_allocation = value_or<double>(j, "config", "treatment_allocation", 0.5);
  if (!(cfg.treatment_allocation > 0.0 && cfg.treatment_allocation < 1.0))
    throw ConfigError("treatment_allocation must be in (0,1)");

  if (j.contains("current")) {
    if (cfg.model != ModelKind::TwoGroup)
      throw ConfigError("'current' is the two-group summary; GLM data goes under 'data'");
    check_keys(j.at("current"), "current", {"y_sum", "n", "v"});
    cfg.current_two_group = j.at("current").get<TwoGroupSummary>();
  }
  if (j.contains("data")) {
    if (cfg.model != ModelKind::Glm) throw ConfigError("'data' applies to GLM runs only");
    cfg.data_path = resolve(base_dir, require<std::string>(j, "config", "data"));
    cfg.current_glm = ingest_csv_glm(*cfg.data_path, /*expect_treatment=*/true);
  }

  if (j.contains("historical")) {
    const json& hj = j.at("historical");
    if (!hj.is_array()) throw ConfigError("historical: expected an array");
    for (std::size_t k = 0; k < hj.size(); ++k) {
      std::string path = "historical[" + std::to_string(k) + "]";
      const json& el = hj[k];
      HistoricalSet set;
      if (cfg.model == ModelKind::TwoGroup) {
        check_keys(el, path, {"y_sum", "n", "v", "a0"});
        set.payload = el.get<TwoGroupSummary>();
      } else {
        check_keys(el, path, {"path", "a0"});
        std::string file = resolve(base_dir, require<std::string>(el, path, "path"));
        set.payload = ingest_csv_glm(file, /*expect_treatment=*/false);
        cfg.historical_paths.push_back(file);
      }
      if (el.contains("a0")) set.a0 = el.at("a0").get<double>();
      cfg.historical.push_back(std::move(set));
    }
  }

  if (j.contains("prior")) {
    check_keys(j.at("prior"), "prior",
               {"mu_t_shape1", "mu_t_shape2", "mu_c_shape1", "mu_c_shape2", "a0_shape1",
                "a0_shape2"});
    cfg.prior = j.at("prior").get<PriorSpec>();
  }

  if (j.contains("design")) {
    check_keys(j.at("design"), "design",
               {"delta", "gamma", "N", "n_t", "n_c", "data_size", "nMC", "nBI"});
    j.at("design").get_to(cfg.design);
  }
  if (j.contains("mcmc")) {
    check_keys(j.at("mcmc"), "mcmc", {"nMC", "nBI"});
    cfg.design.nMC = value_or<long>(j.at("mcmc"), "mcmc", "nMC", cfg.design.nMC);
    cfg.design.nBI = value_or<long>(j.at("mcmc"), "mcmc", "nBI", cfg.design.nBI);
  }

  if (j.contains("sampling_prior")) {
    const json& sp = j.at("sampling_prior");
    if (cfg.model == ModelKind::TwoGroup) {
      cfg.samp_t = parse_sampling_prior(sp, "sampling_prior", cfg.model, true);
      cfg.samp_c = parse_sampling_prior(sp, "sampling_prior", cfg.model, false);
    } else {
      cfg.samp_beta = parse_sampling_prior(sp, "sampling_prior", cfg.model, false);
    }
  }
  if (j.contains("null_sampling_prior")) {
    const json& sp = j.at("null_sampling_prior");
    if (cfg.model == ModelKind::TwoGroup) {
      cfg.null_samp_t = parse_sampling_prior(sp, "null_sampling_prior", cfg.model, true);
      cfg.null_samp_c = parse_sampling_prior(sp, "null_sampling_prior", cfg.model, false);
    } else {
      cfg.null_samp_beta = parse_sampling_prior(sp, "null_sampling_prior", cfg.model, false);
    }
  }

  if (j.contains("x_samples"))
    cfg.x_samples = matrix_from_json(j.at("x_samples"), "x_samples");

  if (j.contains("slice")) {
    check_keys(j.at("slice"), "slice", {"lower", "upper", "width"});
    cfg.slice.lower = value_or<std::vector<double>>(j.at("slice"), "slice", "lower", {});
    cfg.slice.upper = value_or<std::vector<double>>(j.at("slice"), "slice", "upper", {});
    cfg.slice.width = value_or<std::vector<double>>(j.at("slice"), "slice", "width", {});
  }

  if (j.contains("surface")) {
    const json& s = j.at("surface");
    check_keys(s, "surface", {"grid", "rings", "nMC", "nBI", "path", "cache_dir"});
    if (s.contains("grid")) cfg.surface.grid = matrix_from_json(s.at("grid"), "surface.grid");
    cfg.surface.rings = value_or<int>(s, "surface", "rings", 20);
    cfg.surface.nMC = value_or<long>(s, "surface", "nMC", 10000);
    cfg.surface.nBI = value_or<long>(s, "surface", "nBI", 250);
    if (s.contains("path")) cfg.surface.path = resolve(base_dir, s.at("path").get<std::string>());
    if (s.contains("cache_dir"))
      cfg.surface.cache_dir = resolve(base_dir, s.at("cache_dir").get<std::string>());
  }

  if (j.contains("find_n")) {
    const json& f = j.at("find_n");
    check_keys(f, "find_n", {"alpha0", "alpha1", "n_t_grid", "n_c_grid", "data_size_grid"});
    cfg.find_n.alpha0 = value_or<double>(f, "find_n", "alpha0", 0.05);
    cfg.find_n.alpha1 = value_or<double>(f, "find_n", "alpha1", 0.2);
    cfg.find_n.n_t_grid = value_or<std::vector<long>>(f, "find_n", "n_t_grid", {});
    cfg.find_n.n_c_grid = value_or<std::vector<long>>(f, "find_n", "n_c_grid", {});
    cfg.find_n.data_size_grid = value_or<std::vector<long>>(f, "find_n", "data_size_grid", {});
  }

  // Cross-field validation.
  ValidationReport report;
  validate_endpoint(cfg.endpoint, "endpoint", report);
  if (cfg.current_two_group)
    validate_summary(cfg.endpoint.family, *cfg.current_two_group, "current", report);
  if (cfg.current_glm)
    validate_glm_data(cfg.endpoint.family, *cfg.current_glm, /*has_treatment=*/true, "data",
                      report);
  bool a0_required = cfg.a0_mode == A0Mode::Fixed && !cfg.historical.empty() &&
                     (cfg.command != Command::NormConst);
  validate_historical(cfg.endpoint, cfg.historical, a0_required, report);
  validate_prior(cfg.prior, "prior", report);
  if (cfg.command == Command::Design || cfg.command == Command::FindN)
    validate_design_spec(cfg.design, "design", report);
  if (cfg.design.nMC <= cfg.design.nBI)
    report.push_back({"mcmc", "nMC must exceed nBI"});
  if (!report.empty()) throw ConfigError(format_report(report));
  return cfg;
}

nlohmann::json normalize_config(const RunConfig& cfg) {
  json j;
  j["command"] = command_name(cfg.command);
  j["model"] = cfg.model == ModelKind::TwoGroup ? "two-group" : "glm";
  j["endpoint"] = cfg.endpoint;
  j["a0_mode"] = cfg.a0_mode == A0Mode::Fixed ? "fixed" : "random";
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  j["quiet"] = cfg.quiet;
  j["flip_responses"] = cfg.flip_responses;
  j["approximate"] = cfg.approximate;
  j["include_current"] = cfg.include_current;
  j["treatment_allocation"] = cfg.treatment_allocation;
  if (cfg.current_two_group) j["current"] = *cfg.current_two_group;
  if (cfg.data_path) j["data"] = *cfg.data_path;
  if (!cfg.historical.empty()) {
    json h = json::array();
    for (std::size_t k = 0; k < cfg.historical.size(); ++k) {
      json el;
      if (cfg.model == ModelKind::TwoGroup)
        el = cfg.historical[k].two_group();
      else
        el = json{{"path", cfg.historical_paths[k]}};
      if (cfg.historical[k].a0) el["a0"] = *cfg.historical[k].a0;
      h.push_back(std::move(el));
    }
    j["historical"] = std::move(h);
  }
  j["prior"] = cfg.prior;
  j["design"] = cfg.design;
  auto sampling = [&](const std::optional<SamplingPrior>& t, const std::optional<SamplingPrior>& c,
                      const std::optional<SamplingPrior>& beta) -> json {
    json s;
    if (cfg.model == ModelKind::TwoGroup) {
      if (t) {
        s["mu_t"] = vector_to_json(t->draws.col(0));
        if (!t->variance_draws.empty()) s["var_t"] = t->variance_draws;
      }
      if (c) {
        s["mu_c"] = vector_to_json(c->draws.col(0));
        if (!c->variance_draws.empty()) s["var_c"] = c->variance_draws;
      }
    } else if (beta) {
      s["beta"] = matrix_to_json(beta->draws);
      if (!beta->variance_draws.empty()) s["var"] = beta->variance_draws;
    }
    return s;
  };
  json sp = sampling(cfg.samp_t, cfg.samp_c, cfg.samp_beta);
  if (!sp.empty()) j["sampling_prior"] = std::move(sp);
  json nsp = sampling(cfg.null_samp_t, cfg.null_samp_c, cfg.null_samp_beta);
  if (!nsp.empty()) j["null_sampling_prior"] = std::move(nsp);
  if (cfg.x_samples) j["x_samples"] = matrix_to_json(*cfg.x_samples);
  if (!cfg.slice.lower.empty() || !cfg.slice.upper.empty() || !cfg.slice.width.empty()) {
    json s;
    if (!cfg.slice.lower.empty()) s["lower"] = cfg.slice.lower;
    if (!cfg.slice.upper.empty()) s["upper"] = cfg.slice.upper;
    if (!cfg.slice.width.empty()) s["width"] = cfg.slice.width;
    j["slice"] = std::move(s);
  }
  if (cfg.surface.grid || cfg.surface.path || cfg.surface.cache_dir ||
      cfg.command == Command::NormConst) {
    json s;
    if (cfg.surface.grid) s["grid"] = matrix_to_json(*cfg.surface.grid);
    s["rings"] = cfg.surface.rings;
    s["nMC"] = cfg.surface.nMC;
    s["nBI"] = cfg.surface.nBI;
    if (cfg.surface.path) s["path"] = *cfg.surface.path;
    if (cfg.surface.cache_dir) s["cache_dir"] = *cfg.surface.cache_dir;
    j["surface"] = std::move(s);
  }
  if (cfg.command == Command::FindN) {
    json f;
    f["alpha0"] = cfg.find_n.alpha0;
    f["alpha1"] = cfg.find_n.alpha1;
    if (!cfg.find_n.n_t_grid.empty()) f["n_t_grid"] = cfg.find_n.n_t_grid;
    if (!cfg.find_n.n_c_grid.empty()) f["n_c_grid"] = cfg.find_n.n_c_grid;
    if (!cfg.find_n.data_size_grid.empty()) f["data_size_grid"] = cfg.find_n.data_size_grid;
    j["find_n"] = std::move(f);
  }
  return j;
}

std::string config_fingerprint(const RunConfig& cfg) {
  std::string dump = normalize_config(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace ppd::io
