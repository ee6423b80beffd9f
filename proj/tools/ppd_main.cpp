#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ppd/io.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output;
  bool flip_responses = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--workers", args.workers, "worker thread count");
  cmd->add_option("--output", args.output, "report path (JSON)");
  cmd->add_flag("--flip-responses", args.flip_responses,
                "recode responses to test the opposite direction");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

int fail(const char* kind, const std::string& message, int code) {
  nlohmann::json err{{"error", {{"type", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppd: Bayesian analysis and sample size determination with power priors"};
  app.require_subcommand(1);
  CliArgs args;
  const char* expected = nullptr;
  for (const char* name : {"analyze", "design", "normconst", "find-n"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, args);
    sub->callback([&expected, name]() { expected = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(args.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string base_dir = std::filesystem::path(args.config_path).parent_path().string();
    if (base_dir.empty()) base_dir = ".";
    ppd::io::RunConfig cfg = ppd::io::parse_config(buf.str(), base_dir);
    if (ppd::io::command_name(cfg.command) != std::string(expected))
      return fail("config", std::string("config declares command '") +
                                ppd::io::command_name(cfg.command) + "' but '" + expected +
                                "' was invoked",
                  2);
    if (args.seed) cfg.seed = *args.seed;
    if (args.workers) cfg.workers = *args.workers;
    if (args.output) cfg.output = *args.output;
    if (args.flip_responses) cfg.flip_responses = true;
    if (args.quiet) cfg.quiet = true;

    ppd::io::RunReport report = ppd::io::run(cfg, &std::cerr);
    std::cout << report.results.dump(2) << "\n";
    return 0;
  } catch (const ppd::io::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 3);
  }
}
