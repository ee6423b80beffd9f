#include "ppd/io.hpp"

namespace ppd {

using nlohmann::json;

void to_json(json& j, const EndpointSpec& e) {
  j = json{{"family", family_name(e.family)}, {"link", link_name(e.link)}};
}

void from_json(const json& j, EndpointSpec& e) {
  std::string fam = j.at("family").get<std::string>();
  auto f = family_from_name(fam);
  if (!f) throw io::ConfigError("unknown family '" + fam + "'");
  e.family = *f;
  if (j.contains("link")) {
    std::string ln = j.at("link").get<std::string>();
    auto l = link_from_name(ln);
    if (!l) throw io::ConfigError("unknown link '" + ln + "'");
    e.link = *l;
  } else {
    e.link = canonical_link(e.family);
  }
}

void to_json(json& j, const TwoGroupSummary& s) {
  j = json{{"y_sum", s.y_sum}, {"n", s.n}};
  if (s.v) j["v"] = *s.v;
}

void from_json(const json& j, TwoGroupSummary& s) {
  s.y_sum = j.at("y_sum").get<double>();
  s.n = j.at("n").get<long>();
  if (j.contains("v")) s.v = j.at("v").get<double>();
}

void to_json(json& j, const GlmData& d) {
  j = json{{"y", io::vector_to_json(d.y)}, {"X", io::matrix_to_json(d.X)}};
  if (d.trials) j["trials"] = io::vector_to_json(*d.trials);
}

void from_json(const json& j, GlmData& d) {
  d.y = io::vector_from_json(j.at("y"), "y");
  d.X = io::matrix_from_json(j.at("X"), "X");
  if (j.contains("trials")) d.trials = io::vector_from_json(j.at("trials"), "trials");
}

void to_json(json& j, const PriorSpec& p) {
  j = json{{"mu_t_shape1", p.mu_t_shape1}, {"mu_t_shape2", p.mu_t_shape2},
           {"mu_c_shape1", p.mu_c_shape1}, {"mu_c_shape2", p.mu_c_shape2},
           {"a0_shape1", p.a0_shape1},     {"a0_shape2", p.a0_shape2}};
}

void from_json(const json& j, PriorSpec& p) {
  if (j.contains("mu_t_shape1")) p.mu_t_shape1 = j.at("mu_t_shape1").get<double>();
  if (j.contains("mu_t_shape2")) p.mu_t_shape2 = j.at("mu_t_shape2").get<double>();
  if (j.contains("mu_c_shape1")) p.mu_c_shape1 = j.at("mu_c_shape1").get<double>();
  if (j.contains("mu_c_shape2")) p.mu_c_shape2 = j.at("mu_c_shape2").get<double>();
  if (j.contains("a0_shape1")) p.a0_shape1 = j.at("a0_shape1").get<double>();
  if (j.contains("a0_shape2")) p.a0_shape2 = j.at("a0_shape2").get<double>();
}

void to_json(json& j, const DesignSpec& d) {
  j = json{{"delta", d.delta}, {"gamma", d.gamma},         {"N", d.N},
           {"n_t", d.n_t},     {"n_c", d.n_c},             {"data_size", d.data_size},
           {"nMC", d.nMC},     {"nBI", d.nBI}};
}

void from_json(const json& j, DesignSpec& d) {
  if (j.contains("delta")) d.delta = j.at("delta").get<double>();
  if (j.contains("gamma")) d.gamma = j.at("gamma").get<double>();
  if (j.contains("N")) d.N = j.at("N").get<long>();
  if (j.contains("n_t")) d.n_t = j.at("n_t").get<long>();
  if (j.contains("n_c")) d.n_c = j.at("n_c").get<long>();
  if (j.contains("data_size")) d.data_size = j.at("data_size").get<long>();
  if (j.contains("nMC")) d.nMC = j.at("nMC").get<long>();
  if (j.contains("nBI")) d.nBI = j.at("nBI").get<long>();
}

void to_json(json& j, const SamplingPrior& s) {
  j = json{{"draws", io::matrix_to_json(s.draws)}};
  if (!s.variance_draws.empty()) j["variance_draws"] = s.variance_draws;
}

void from_json(const json& j, SamplingPrior& s) {
  s.draws = io::matrix_from_json(j.at("draws"), "draws");
  if (j.contains("variance_draws"))
    s.variance_draws = j.at("variance_draws").get<std::vector<double>>();
}

void to_json(json& j, const NormConstSurface& s) {
  j = json{{"coefficients", io::vector_to_json(s.coefficients)},
           {"degree", s.degree},
           {"r_squared", s.r_squared},
           {"hull_min", io::vector_to_json(s.hull_min)},
           {"hull_max", io::vector_to_json(s.hull_max)},
           {"fingerprint", s.fingerprint}};
}

void from_json(const json& j, NormConstSurface& s) {
  s.coefficients = io::vector_from_json(j.at("coefficients"), "coefficients");
  s.degree = j.at("degree").get<int>();
  s.r_squared = j.at("r_squared").get<double>();
  s.hull_min = io::vector_from_json(j.at("hull_min"), "hull_min");
  s.hull_max = io::vector_from_json(j.at("hull_max"), "hull_max");
  s.fingerprint = j.value("fingerprint", std::string{});
}

void to_json(json& j, const OperatingCharacteristic& oc) {
  j = json{{"estimate", oc.estimate},
           {"mc_stderr", oc.mc_stderr},
           {"rejections", oc.rejections},
           {"trials", oc.trials}};
  if (!oc.average_posterior_means.empty())
    j["average_posterior_means"] = oc.average_posterior_means;
  if (oc.excluded > 0) j["excluded"] = oc.excluded;
}

void to_json(json& j, const SampleSizeResult& r) {
  json table = json::array();
  for (const auto& row : r.table)
    table.push_back(json{{"n", row.n}, {"type1_error", row.type1_error}, {"power", row.power}});
  j = json{{"table", table}};
  if (r.n_alpha0) j["n_alpha0"] = *r.n_alpha0;
  if (r.n_alpha1) j["n_alpha1"] = *r.n_alpha1;
  if (r.n_final)
    j["n_final"] = *r.n_final;
  else
    j["unsatisfied"] = json::array({r.n_alpha0 ? json("alpha1") : json("alpha0")});
}

namespace io {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of rows");
  const std::size_t nrow = j.size();
  std::size_t ncol = 0;
  if (nrow > 0) {
    if (!j[0].is_array()) throw ConfigError(path + ": expected an array of rows");
    ncol = j[0].size();
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(nrow), static_cast<Eigen::Index>(ncol));
  for (std::size_t i = 0; i < nrow; ++i) {
    if (!j[i].is_array() || j[i].size() != ncol)
      throw ConfigError(path + ": row " + std::to_string(i + 1) + " has inconsistent length");
    for (std::size_t c = 0; c < ncol; ++c) {
      if (!j[i][c].is_number())
        throw ConfigError(path + ": non-numeric entry at row " + std::to_string(i + 1));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ConfigError(path + ": non-numeric entry at index " + std::to_string(i + 1));
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace io
}  // namespace ppd
