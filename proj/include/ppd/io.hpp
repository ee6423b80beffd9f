#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ppd/design.hpp"
#include "ppd/model.hpp"
#include "ppd/norm_const.hpp"

namespace ppd {

// JSON adapters for the core types (found by nlohmann via ADL).
void to_json(nlohmann::json& j, const EndpointSpec& e);
void from_json(const nlohmann::json& j, EndpointSpec& e);
void to_json(nlohmann::json& j, const TwoGroupSummary& s);
void from_json(const nlohmann::json& j, TwoGroupSummary& s);
void to_json(nlohmann::json& j, const GlmData& d);
void from_json(const nlohmann::json& j, GlmData& d);
void to_json(nlohmann::json& j, const PriorSpec& p);
void from_json(const nlohmann::json& j, PriorSpec& p);
void to_json(nlohmann::json& j, const DesignSpec& d);
void from_json(const nlohmann::json& j, DesignSpec& d);
void to_json(nlohmann::json& j, const SamplingPrior& s);
void from_json(const nlohmann::json& j, SamplingPrior& s);
void to_json(nlohmann::json& j, const NormConstSurface& s);
void from_json(const nlohmann::json& j, NormConstSurface& s);
void to_json(nlohmann::json& j, const OperatingCharacteristic& oc);
void to_json(nlohmann::json& j, const SampleSizeResult& r);

namespace io {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path);

/// Configuration or data errors carry the offending path for the
/// machine-readable error report.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { Analyze, Design, NormConst, FindN };
const char* command_name(Command c);

struct SliceSettings {
  std::vector<double> lower, upper, width;
};

struct SurfaceSettings {
  std::optional<Eigen::MatrixXd> grid;
  int rings = 20;
  long nMC = 10000;
  long nBI = 250;
  std::optional<std::string> path;       // explicit surface file
  std::optional<std::string> cache_dir;  // fingerprint-keyed cache
};

struct FindNSettings {
  double alpha0 = 0.05;
  double alpha1 = 0.2;
  std::vector<long> n_t_grid, n_c_grid, data_size_grid;
};

struct RunConfig {
  Command command = Command::Analyze;
  ModelKind model = ModelKind::TwoGroup;
  EndpointSpec endpoint;
  A0Mode a0_mode = A0Mode::Fixed;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output;
  bool quiet = false;
  bool flip_responses = false;
  bool approximate = false;
  bool include_current = true;
  double treatment_allocation = 0.5;

  std::optional<TwoGroupSummary> current_two_group;
  std::optional<std::string> data_path;
  std::optional<GlmData> current_glm;
  std::vector<HistoricalSet> historical;
  std::vector<std::string> historical_paths;  // GLM sets, parallel to historical
  PriorSpec prior;
  DesignSpec design;
  std::optional<SamplingPrior> samp_t, samp_c, samp_beta;
  std::optional<SamplingPrior> null_samp_t, null_samp_c, null_samp_beta;
  std::optional<Eigen::MatrixXd> x_samples;
  SliceSettings slice;
  SurfaceSettings surface;
  FindNSettings find_n;
};

/// Parses and fully validates a JSON run configuration.  Unknown keys are
/// an error; relative data paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Canonical JSON form of a config: defaults filled, keys sorted.  Parsing
/// the result reproduces the same normalized form.
nlohmann::json normalize_config(const RunConfig& cfg);

std::string config_fingerprint(const RunConfig& cfg);

struct RunReport {
  std::string version;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string config_fingerprint;
  nlohmann::json config;   // normalized echo
  nlohmann::json results;
  std::map<std::string, double> timings;  // seconds per phase
};

nlohmann::json report_to_json(const RunReport& r);

/// Executes the configured command.  Progress for design runs goes to
/// `progress` (stderr in the CLI) at 5% increments unless quiet.
RunReport run(const RunConfig& cfg, std::ostream* progress = nullptr);

/// Serializes the report to `path` atomically (write to a temp file, then
/// rename): a failed run never leaves a partial report behind.
void write_report(const RunReport& r, const std::string& path);

/// Strict CSV readers.  Headers are required; missing or non-numeric cells
/// are errors naming the row.
GlmData ingest_csv_glm(const std::string& path, bool expect_treatment);
std::vector<HistoricalSet> ingest_csv_two_group(const std::string& path, Family family);

}  // namespace io
}  // namespace ppd
