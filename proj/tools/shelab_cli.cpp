// shelab: run one experiment from a config file, or validate a config.
#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shelab/config.hpp"
#include "shelab/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

int run(const std::string& experiment, const RunOptions& opt) {
  shelab::ExperimentConfig cfg = shelab::load_config(opt.config);
  cfg.experiment = experiment;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.format) cfg.format = *opt.format;
  const auto violations = shelab::config_violations(cfg);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << opt.config << ": " << v << '\n';
    return kExitError;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = shelab::run_experiment(cfg, opt.workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // the output location is not part of the hashed config
  const std::string out_dir = opt.out_dir.value_or(cfg.out_dir);
  for (const auto& path : shelab::emit_result(cfg, result, out_dir, cfg.format, wall)) std::cout << path << '\n';
  int failed = 0;
  for (const auto& r : result.rows) {
    if (r.verdict != shelab::Verdict::Fail) continue;
    ++failed;
    std::cerr << "FAIL " << r.resolution << ' ' << r.statistic << " = " << shelab::format_double(r.value) << '\n';
  }
  return failed == 0 ? kExitPass : kExitFail;
}

int validate(const std::string& path) {
  const shelab::ExperimentConfig cfg = shelab::load_config(path);
  const auto violations = shelab::config_violations(cfg);
  for (const auto& v : violations) std::cout << "violation: " << v << '\n';
  for (const auto& d : shelab::derived_quantities(cfg)) std::cout << d.name << " = " << d.value << '\n';
  std::cout << "config_hash = " << shelab::config_hash(cfg) << '\n';
  return violations.empty() ? kExitPass : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic heat equation lab"};
  app.require_subcommand(1);
  RunOptions opt;
  std::string validate_path;

  const char* experiments[] = {"simulate", "equivalence", "kappa", "sewing", "besov", "uniqueness"};
  for (const char* name : experiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", opt.config, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override run.seed");
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--out-dir", opt.out_dir, "override output.dir");
    sub->add_option("--format", opt.format, "csv or ndjson")->check(CLI::IsMember({"csv", "ndjson"}));
  }
  auto* val = app.add_subcommand("validate", "check a config and list derived quantities");
  val->add_option("--config", validate_path, "config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (val->parsed()) return validate(validate_path);
    for (const char* name : experiments) {
      if (app.got_subcommand(name)) return run(name, opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
