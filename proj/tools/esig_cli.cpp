#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "esig/batch.hpp"
#include "esig/config.hpp"
#include "esig/experiments.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw esig::ConfigError("--config", "cannot open '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw esig::ConfigError("config", std::string("parse error: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected-signature estimation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", esig::kVersion);

  std::string config_file, out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  for (const auto& kind : esig::kExperimentKinds) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config_file, "JSON experiment config");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  esig::ExperimentConfig config;
  try {
    json j = config_file.empty() ? json::object() : read_json(config_file);
    if (!j.is_object()) throw esig::ConfigError("config", "top level must be an object");
    if (j.contains("experiment") && j["experiment"] != kind)
      throw esig::ConfigError("experiment", "config is for '" + j["experiment"].dump() + "' but subcommand is '" + kind + "'");
    j["experiment"] = kind;
    if (seed) j["seed"] = *seed;
    config = esig::parse_config(j);
  } catch (const esig::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (threads > 0) esig::set_threads(threads);
  try {
    const auto out = esig::run_experiment(config);
    esig::write_outputs(out, config, out_dir);
    std::cout << kind << ": wrote " << out_dir << " (config " << esig::config_hash(config.effective) << ")\n";
    if (kind == "selftest" && !out.summary.value("all_pass", false)) {
      std::cerr << "selftest: at least one check failed\n";
      return 1;
    }
  } catch (const esig::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
