#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "shelab/drift.hpp"

namespace shelab {

inline constexpr double kBesovRadius = 8.0;
inline constexpr int kBesovLog2Points = 14;

/// Windowed dyadic surrogate of the B^β_{q,∞} norm. Block j = 0 is the mean
/// mode (weight 1 for every β); block j >= 1 holds discrete frequencies 2^{j-1} <= |m| < 2^j (the
/// Nyquist mode is folded into the top block).
struct BesovEstimate {
  double window_radius = kBesovRadius;
  std::vector<int> block_index;
  std::vector<double> block_norms;
  double beta = 0.0;
  double q = std::numeric_limits<double>::infinity();
  double value = 0.0;
  bool aliasing = false;

  /// Same block norms reweighted for another β.
  double value_at(double beta) const;
};

/// f sampled on [-R, R) times a C∞ window that is flat on |x| <= R/2.
std::vector<double> besov_samples(const std::function<double(double)>& f, double radius = kBesovRadius,
                                  int log2_points = kBesovLog2Points);

BesovEstimate estimate_besov_norm(const std::function<double(double)>& f, double beta, double q,
                                  double radius = kBesovRadius, int log2_points = kBesovLog2Points);
BesovEstimate estimate_besov_norm_sampled(const std::vector<double>& samples, double beta, double q,
                                          double radius = kBesovRadius);

/// Discrete L_p norm of the windowed samples.
double windowed_lp_norm(const std::function<double(double)>& f, double p, double radius = kBesovRadius,
                        int log2_points = kBesovLog2Points);

/// Constant c with estimate(f, -1/p, ∞) <= c ‖f‖_{L_p} for p in [1, 2]. It
/// comes from bounding each block by its mode count, so it is rigorous for
/// the discrete surrogate and needs no fitting.
double besov_embedding_constant(double p, double radius = kBesovRadius);

struct ConvergenceReport {
  std::vector<double> levels;
  std::vector<double> estimates_at_beta;
  double sup = 0.0;
  double growth_slope = 0.0;
  bool bounded = false;
  std::vector<double> probe_betas;
  std::vector<std::vector<double>> cross_differences;  // [probe][consecutive pair]
  bool cauchy = false;
  bool pass = false;
  std::string note;
};

/// Growth slope of log-estimate vs log-level below which the sup is called bounded.
inline constexpr double kBoundedSlope = 0.2;

ConvergenceReport check_c_beta_minus_convergence(const std::vector<MollifiedDrift>& sequence,
                                                 const DriftSpec& target, double beta,
                                                 double radius = kBesovRadius);

/// Same report for arbitrary callables f_n indexed by `levels`.
ConvergenceReport check_convergence_callables(const std::vector<std::function<double(double)>>& sequence,
                                              const std::vector<double>& levels, double beta,
                                              double radius = kBesovRadius);

}  // namespace shelab
