#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ppd/io.hpp"

using namespace ppd;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "ppd_io_test";
  std::filesystem::create_directories(p);
  return p;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kTable3Config = R"({
  "command": "design",
  "model": "two-group",
  "endpoint": {"family": "bernoulli"},
  "a0_mode": "fixed",
  "seed": 1,
  "historical": [
    {"y_sum": 44, "n": 535, "a0": 0.3},
    {"y_sum": 33, "n": 304, "a0": 0.3}
  ],
  "prior": {"mu_t_shape1": 1e-4, "mu_t_shape2": 1e-4,
            "mu_c_shape1": 1e-4, "mu_c_shape2": 1e-4},
  "design": {"delta": 0.041, "gamma": 0.95, "N": 60, "n_t": 750, "n_c": 250},
  "sampling_prior": {"mu_t": [0.092], "mu_c": [0.092]}
})";

}  // namespace

TEST_CASE("serialization round-trips are lossless") {
  SUBCASE("two-group summary") {
    TwoGroupSummary s{44.0 + 1.0 / 3.0, 535, 1.234567890123456e-7};
    json j = s;
    auto back = json::parse(j.dump()).get<TwoGroupSummary>();
    CHECK(back.y_sum == s.y_sum);
    CHECK(back.n == s.n);
    CHECK(*back.v == *s.v);
  }
  SUBCASE("glm data with trials") {
    GlmData d;
    d.y = Eigen::VectorXd::LinSpaced(4, 0.1, 0.9999999999999);
    d.X = Eigen::MatrixXd::Random(4, 3);
    d.trials = Eigen::VectorXd::Constant(4, 7.0);
    json j = d;
    auto back = json::parse(j.dump()).get<GlmData>();
    CHECK(back.y == d.y);
    CHECK(back.X == d.X);
    CHECK(*back.trials == *d.trials);
  }
  SUBCASE("prior, design, sampling prior") {
    PriorSpec p;
    p.mu_c_shape1 = 1e-4;
    p.a0_shape2 = 2.5;
    DesignSpec ds;
    ds.delta = 0.041;
    ds.N = 12345;
    SamplingPrior sp;
    sp.draws = Eigen::MatrixXd::Random(3, 2);
    sp.variance_draws = {0.5, 1.5};
    auto p2 = json::parse(json(p).dump()).get<PriorSpec>();
    auto d2 = json::parse(json(ds).dump()).get<DesignSpec>();
    auto s2 = json::parse(json(sp).dump()).get<SamplingPrior>();
    CHECK(p2.mu_c_shape1 == p.mu_c_shape1);
    CHECK(p2.a0_shape2 == p.a0_shape2);
    CHECK(d2.delta == ds.delta);
    CHECK(d2.N == ds.N);
    CHECK(s2.draws == sp.draws);
    CHECK(s2.variance_draws == sp.variance_draws);
  }
  SUBCASE("surface") {
    NormConstSurface s;
    s.coefficients = Eigen::VectorXd::Random(5);
    s.degree = 4;
    s.r_squared = 0.99999;
    s.hull_min = Eigen::VectorXd::Constant(1, 0.05);
    s.hull_max = Eigen::VectorXd::Constant(1, 1.0);
    s.fingerprint = "abcd";
    auto b = json::parse(json(s).dump()).get<NormConstSurface>();
    CHECK(b.coefficients == s.coefficients);
    CHECK(b.degree == s.degree);
    CHECK(b.r_squared == s.r_squared);
    CHECK(b.fingerprint == s.fingerprint);
  }
}

TEST_CASE("parse_config: the two-group design listing") {
  io::RunConfig cfg = io::parse_config(kTable3Config);
  CHECK(cfg.command == io::Command::Design);
  CHECK(cfg.model == ModelKind::TwoGroup);
  CHECK(cfg.endpoint.family == Family::Bernoulli);
  CHECK(cfg.endpoint.link == Link::Logit);  // canonical default
  CHECK(cfg.a0_mode == A0Mode::Fixed);
  REQUIRE(cfg.historical.size() == 2);
  CHECK(cfg.historical[0].two_group().y_sum == 44.0);
  CHECK(*cfg.historical[1].a0 == 0.3);
  CHECK(cfg.design.delta == 0.041);
  CHECK(cfg.design.gamma == 0.95);
  CHECK(cfg.design.nBI == 250);  // default
  REQUIRE(cfg.samp_t);
  CHECK(cfg.samp_t->draws(0, 0) == 0.092);

  // normalized echo is idempotent
  json n1 = io::normalize_config(cfg);
  io::RunConfig cfg2 = io::parse_config(n1.dump());
  json n2 = io::normalize_config(cfg2);
  CHECK(n1 == n2);
  CHECK(io::config_fingerprint(cfg) == io::config_fingerprint(cfg2));
}

TEST_CASE("parse_config: errors") {
  CHECK_THROWS_WITH_AS(io::parse_config("{}"), "command required", io::ConfigError);
  CHECK_THROWS_AS(io::parse_config(""), io::ConfigError);

  json bad = json::parse(kTable3Config);
  bad["design"]["gamma"] = 1.5;
  try {
    io::parse_config(bad.dump());
    FAIL("expected a validation error");
  } catch (const io::ConfigError& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }

  json unknown = json::parse(kTable3Config);
  unknown["historicl"] = json::array();
  try {
    io::parse_config(unknown.dump());
    FAIL("expected an unknown-key error");
  } catch (const io::ConfigError& e) {
    CHECK(std::string(e.what()).find("historicl") != std::string::npos);
  }

  json badmode = json::parse(kTable3Config);
  badmode["a0_mode"] = "sometimes";
  CHECK_THROWS_AS(io::parse_config(badmode.dump()), io::ConfigError);
}

TEST_CASE("csv ingestion") {
  auto dir = temp_dir();
  SUBCASE("toy logistic file") {
    write_file(dir / "toy.csv", "y,treat,x1\n1,1,0.5\n0,0,-0.25\n1,1,0.75\n");
    GlmData d = io::ingest_csv_glm((dir / "toy.csv").string(), true);
    CHECK(d.y.size() == 3);
    CHECK(d.X.cols() == 2);
    CHECK(d.X(0, 0) == 1.0);
    CHECK(d.X(1, 1) == -0.25);
    CHECK_FALSE(d.trials);
  }
  SUBCASE("missing values are rejected with row numbers") {
    write_file(dir / "na.csv", "y,treat,x1\n1,1,0.5\n0,NA,-0.25\n");
    try {
      io::ingest_csv_glm((dir / "na.csv").string(), true);
      FAIL("expected a missing-value error");
    } catch (const io::ConfigError& e) {
      CHECK(std::string(e.what()).find("rows 3") != std::string::npos);
    }
  }
  SUBCASE("non-numeric cells are rejected") {
    write_file(dir / "text.csv", "y,treat\n1,yes\n");
    CHECK_THROWS_AS(io::ingest_csv_glm((dir / "text.csv").string(), true), io::ConfigError);
  }
  SUBCASE("treatment column required for current data") {
    write_file(dir / "notreat.csv", "y,x1\n1,0.5\n");
    CHECK_THROWS_AS(io::ingest_csv_glm((dir / "notreat.csv").string(), true), io::ConfigError);
    CHECK_NOTHROW(io::ingest_csv_glm((dir / "notreat.csv").string(), false));
  }
  SUBCASE("binomial y > n_trials surfaces the row") {
    write_file(dir / "bin.csv", "y,n_trials,treat\n2,5,1\n7,5,0\n");
    GlmData d = io::ingest_csv_glm((dir / "bin.csv").string(), true);
    ValidationReport r;
    validate_glm_data(Family::Binomial, d, true, "data", r);
    REQUIRE_FALSE(r.empty());
    bool found = false;
    for (const auto& v : r)
      if (v.message.find("row 2") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("two-group historical file") {
    write_file(dir / "tg.csv", "y_sum,n,a0\n44,535,0.3\n33,304,0.3\n");
    auto sets = io::ingest_csv_two_group((dir / "tg.csv").string(), Family::Bernoulli);
    REQUIRE(sets.size() == 2);
    CHECK(sets[0].two_group().n == 535);
    CHECK(*sets[1].a0 == 0.3);
  }
}

TEST_CASE("run: design reports are deterministic and atomic") {
  io::RunConfig cfg = io::parse_config(kTable3Config);
  cfg.workers = 2;
  auto dir = temp_dir();
  cfg.output = (dir / "report.json").string();

  io::RunReport r1 = io::run(cfg);
  io::RunReport r2 = io::run(cfg);
  CHECK(r1.results.dump() == r2.results.dump());

  CHECK(std::filesystem::exists(cfg.output));
  CHECK_FALSE(std::filesystem::exists(cfg.output + ".tmp"));
  std::ifstream in(cfg.output);
  json file = json::parse(in);
  CHECK(file["results"].dump() == r1.results.dump());
  CHECK(file["seed"] == 1);
  CHECK(file["config"]["command"] == "design");
  double est = file["results"]["operating_characteristic"]["estimate"].get<double>();
  CHECK(est > 0.6);
  CHECK(est < 1.0);

  // worker-count independence end to end
  cfg.workers = 1;
  cfg.output.clear();
  io::RunReport r3 = io::run(cfg);
  CHECK(r3.results.dump() == r1.results.dump());
}

TEST_CASE("run: analyze summarizes the posterior") {
  json j = json::parse(R"({
    "command": "analyze",
    "model": "two-group",
    "endpoint": {"family": "bernoulli"},
    "a0_mode": "fixed",
    "seed": 3,
    "current": {"y_sum": 44, "n": 535},
    "historical": [{"y_sum": 33, "n": 304, "a0": 0.5}],
    "prior": {"mu_c_shape1": 1.0, "mu_c_shape2": 1.0},
    "mcmc": {"nMC": 20000, "nBI": 250}
  })");
  io::RunReport r = io::run(io::parse_config(j.dump()));
  auto& post = r.results.at("posterior");
  REQUIRE(post.size() == 1);
  CHECK(post[0]["parameter"] == "mu_c");
  double mean = post[0]["mean"].get<double>();
  double want = (1.0 + 44.0 + 0.5 * 33.0) / (2.0 + 535.0 + 0.5 * 304.0);
  CHECK(std::abs(mean - want) < 0.005);
  CHECK(post[0]["q2.5"].get<double>() < mean);
  CHECK(post[0]["q97.5"].get<double>() > mean);
}

TEST_CASE("run: flip-responses recodes a Bernoulli two-group analysis") {
  json j = json::parse(R"({
    "command": "analyze",
    "model": "two-group",
    "endpoint": {"family": "bernoulli"},
    "a0_mode": "fixed",
    "seed": 4,
    "current": {"y_sum": 44, "n": 535},
    "historical": [],
    "mcmc": {"nMC": 10000, "nBI": 250}
  })");
  io::RunConfig cfg = io::parse_config(j.dump());
  cfg.flip_responses = true;
  io::RunReport r = io::run(cfg);
  double mean = r.results.at("posterior")[0]["mean"].get<double>();
  CHECK(std::abs(mean - 492.0 / 537.0) < 0.005);  // Beta(1+491, 1+44) mean
}

TEST_CASE("run: GLM analyze and a cached random-a0 surface") {
  auto dir = temp_dir();
  // deterministic toy logistic data
  std::string cur = "y,treat,x1\n";
  std::string hist = "y,x1\n";
  for (int i = 0; i < 40; ++i) {
    double x = -1.0 + 0.05 * i;
    int t = i % 2;
    cur += std::to_string((i * 7 % 11) < 4 ? 1 : 0) + "," + std::to_string(t) + "," +
           std::to_string(x) + "\n";
    hist += std::to_string((i * 5 % 13) < 5 ? 1 : 0) + "," + std::to_string(x) + "\n";
  }
  write_file(dir / "cur.csv", cur);
  write_file(dir / "hist.csv", hist);

  json j = json::parse(R"({
    "command": "analyze",
    "model": "glm",
    "endpoint": {"family": "bernoulli", "link": "logit"},
    "a0_mode": "fixed",
    "seed": 5,
    "data": "cur.csv",
    "historical": [{"path": "hist.csv", "a0": 0.5}],
    "mcmc": {"nMC": 3000, "nBI": 250}
  })");
  io::RunReport r = io::run(io::parse_config(j.dump(), dir.string()));
  auto& post = r.results.at("posterior");
  REQUIRE(post.size() == 3);  // intercept, treatment, x1
  CHECK(post[0]["parameter"] == "beta_0");
  CHECK(post[1]["parameter"] == "beta_1");

  // random-a0 design fits the surface once and caches it by fingerprint
  json d = json::parse(R"({
    "command": "design",
    "model": "glm",
    "endpoint": {"family": "bernoulli", "link": "logit"},
    "a0_mode": "random",
    "seed": 6,
    "historical": [{"path": "hist.csv"}],
    "design": {"delta": 0, "gamma": 0.9, "N": 6, "data_size": 30},
    "mcmc": {"nMC": 600, "nBI": 100},
    "sampling_prior": {"beta": [[-0.5, -0.8, 0.3]]},
    "surface": {"grid": [[0.1],[0.25],[0.4],[0.55],[0.7],[0.85],[1.0]],
                "nMC": 3000, "nBI": 250, "cache_dir": "surf_cache"}
  })");
  std::filesystem::remove_all(dir / "surf_cache");
  io::RunConfig cfg = io::parse_config(d.dump(), dir.string());
  io::RunReport first = io::run(cfg);
  CHECK(first.timings.count("surface_fit_s") == 1);
  CHECK(std::filesystem::exists(dir / "surf_cache"));
  io::RunReport second = io::run(cfg);
  CHECK(second.timings.count("surface_fit_s") == 0);  // loaded from cache
  CHECK(first.results.dump() == second.results.dump());
}

TEST_CASE("run: find-n on a fast two-group configuration") {
  json j = json::parse(kTable3Config);
  j["command"] = "find-n";
  j["design"]["N"] = 300;
  j["null_sampling_prior"] = {{"mu_t", {0.133}}, {"mu_c", {0.092}}};
  j["find_n"] = {{"alpha0", 0.05},
                 {"alpha1", 0.2},
                 {"n_t_grid", {750, 900}},
                 {"n_c_grid", {250, 300}}};
  io::RunReport r = io::run(io::parse_config(j.dump()));
  auto& ss = r.results.at("sample_size");
  REQUIRE(ss.contains("n_final"));
  CHECK(ss["n_alpha1"] == 1000);  // power already above 0.8 at the first point
  CHECK(ss["table"].size() == 2);
}
