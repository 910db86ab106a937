#pragma once

#include <string>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/domain_grid.hpp"

namespace shelab {

/// Mean over realizations of one statistic at one resolution.
struct EnsembleStat {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int count = 0;
};

/// Statistics whose means must shrink together under joint refinement.
struct RefinementSeries {
  std::string name;
  std::vector<EnsembleStat> per_resolution;
  std::vector<double> ratios;  // mean_r / mean_{r+1}
  bool at_floor = false;       // every mean below kResidualFloor
  bool pass = false;
};

inline constexpr double kResidualFloor = 1e-11;
inline constexpr double kRefinementRatio = 1.3;

RefinementSeries make_series(std::string name, std::vector<EnsembleStat> stats);

struct EquivalenceTable {
  std::vector<int> n_space;
  std::vector<int> n_time;
  std::vector<RefinementSeries> series;  // mild, weak, regularized mild, regularized weak
  // Cauchy differences along cfg.mollification_levels at the finest resolution
  std::vector<double> ladder_levels;
  RefinementSeries ladder_mild;
  RefinementSeries ladder_weak;
  bool ladder_monotone = false;
  int excluded = 0;  // realizations with a non-finite path
  bool pass = false;
};

/// Mild residuals, weak residuals over the test family and both regularized
/// Cauchy reports, per resolution, on noise coupled through the finest grid.
EquivalenceTable equivalence_harness(const ExperimentConfig& cfg, int workers = 1);

struct UniquenessTable {
  std::vector<int> n_space;
  std::vector<int> n_time;
  std::string mode;
  RefinementSeries distance;
  bool pass = false;
};

/// Sup-over-probe distance between two solutions driven by the same noise.
UniquenessTable uniqueness_coupling(const ExperimentConfig& cfg, int workers = 1);

/// Grids of resolution r: n_space 2^r and n_time 2^r times the coarsest.
Grid1D resolution_grid(const ExperimentConfig& cfg, int r);
TimeGrid resolution_tgrid(const ExperimentConfig& cfg, int r);

}  // namespace shelab
