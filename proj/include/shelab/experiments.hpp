#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shelab/config.hpp"
#include "shelab/field.hpp"
#include "shelab/io.hpp"

namespace shelab {

struct ExperimentResult {
  std::string experiment;
  std::vector<VerdictRow> rows;
  std::vector<nlohmann::json> records;                 // detail records appended to NDJSON output
  std::vector<std::pair<std::string, FieldRows>> dumps;  // file name -> field

  bool pass() const;
};

/// Runs cfg.experiment with `workers` threads. Worker count never changes the result.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

/// Writes <experiment>.csv or .ndjson, field dumps, manifest.json (no wall
/// time) and timing.json into `out_dir`. Returns the written paths.
std::vector<std::string> emit_result(const ExperimentConfig& cfg, const ExperimentResult& result,
                                     const std::string& out_dir, const std::string& format, double wall_seconds);

nlohmann::json manifest(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace shelab
