// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Command line front end: afm <task> --config <path> [--seed N] [--out dir].
// Exit codes: 0 success, 2 config/usage error, 3 task failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "afm/afm.hpp"

namespace {

int run(const std::string& task_arg, const std::string& config_path,
        std::optional<std::uint64_t> seed, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return 2;
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
    return 2;
  }

  afm::RunReport report;
  try {
    afm::ExperimentConfig config = afm::parse_config(doc);
    if (afm::task_name(config.task) != task_arg) {
      std::cerr << "error: config task '" << afm::task_name(config.task)
                << "' does not match command '" << task_arg << "'\n";
      return 2;
    }
    report = afm::run_experiment(doc, seed);
  } catch (const afm::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const afm::Error& e) {
    std::cerr << "task error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  nlohmann::json out = report;
  std::cout << out.dump(2) << "\n";

  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory '" << out_dir << "'\n";
      return 3;
    }
    std::ofstream rf(std::filesystem::path(out_dir) / "report.json");
    rf << out.dump(2) << "\n";
    for (const auto& [name, content] : report.csv_tables) {
      std::ofstream cf(std::filesystem::path(out_dir) / name);
      cf << content;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence-operator metrology and window-net experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  for (const char* name : {"simulate", "memory", "modulus", "certify", "bounds", "fit-tcn",
                           "compare", "check", "pipeline"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Path to the experiment config JSON")->required();
    sub->add_option("--seed", seed, "Override the config rng seed");
    sub->add_option("--out", out_dir, "Directory for report.json and CSV tables");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return run(app.get_subcommands().front()->get_name(), config_path, seed, out_dir);
}
