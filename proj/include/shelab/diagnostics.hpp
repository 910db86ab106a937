#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shelab/domain_grid.hpp"
#include "shelab/drift.hpp"
#include "shelab/field.hpp"
#include "shelab/solver.hpp"
#include "shelab/white_noise.hpp"

namespace shelab {

/// Log-log least squares fit value ≈ C scale^exponent.
struct ExponentFit {
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();  // 95%, HC-robust
  double stderr_hc = 0.0;
  int n_points = 0;
  double residual_rms = 0.0;
  int dropped = 0;            // nonpositive values removed before the fit
  bool degenerate = false;    // nothing left to fit (all values zero)
  bool underpowered = false;  // fewer than 5 usable scales
};

inline constexpr int kMinFitPoints = 5;

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& samples);
ExponentFit fit_exponent(const std::vector<double>& scales, const std::vector<double>& values);

/// Probe layout shared by the moment accumulators: all pairs (s, x) with
/// s >= s_min on every t_stride-th time and every x_stride-th node.
struct MomentProbe {
  double s_min = 1.0 / 16.0;
  int t_stride = 4;
  int x_stride = 4;
};

/// Per (lag, probe point) sums of |D|^m: the sufficient statistics of an
/// ensemble of increments. Merging adds sums, so the reduction order alone
/// fixes the bits of the result.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  MomentAccumulator(std::vector<int> lag_steps, int n_probes_per_lag, double moment);

  void add(int lag, int probe, double d);
  void count_realization() { ++realizations_; }
  void merge(const MomentAccumulator& other);

  double moment() const { return moment_; }
  int realizations() const { return realizations_; }
  const std::vector<int>& lag_steps() const { return lag_steps_; }

  /// max over probes of (mean |D|^m)^{1/m} for each lag, with its MC standard error.
  std::vector<double> max_norms(std::vector<double>* stderrs = nullptr) const;
  bool all_zero() const;

 private:
  std::vector<int> lag_steps_;
  int probes_ = 0;
  double moment_ = 2.0;
  int realizations_ = 0;
  std::vector<double> sum_;   // [lag][probe] Σ|D|^m
  std::vector<double> sum2_;  // Σ|D|^{2m}
};

/// D = u_{s+h} - V_{s+h} - P_h(u_s - V_s) at every probe of `probe`, one lag per entry.
struct KappaSetup {
  std::vector<int> lag_exponents{3, 4, 5, 6, 7, 8};  // h = 2^{-k}
  double moment = 2.0;
  MomentProbe probe;
};

MomentAccumulator make_kappa_accumulator(const Grid1D& grid, const TimeGrid& tgrid, const KappaSetup& setup);
void accumulate_kappa(MomentAccumulator& acc, const FieldPath& path, const KappaSetup& setup);

struct KappaReport {
  double p = std::numeric_limits<double>::infinity();
  double kappa_theory = 1.0;
  double moment = 2.0;
  int realizations = 0;
  std::vector<double> lags;
  std::vector<double> norms;
  std::vector<double> norm_stderr;
  ExponentFit kappa_hat;
  bool degenerate = false;
  bool underpowered = false;
  double excluded_layer = 1.0 / 16.0;
  std::string caveat = "sup over x replaced by the max over a probe lattice";
};

/// 1 - 1/(4p), p in [1, ∞].
double kappa_theory(double p);

KappaReport estimate_kappa(const MomentAccumulator& acc, const TimeGrid& tgrid, double p);
KappaReport estimate_kappa(const std::vector<FieldPath>& ensemble, double p, const KappaSetup& setup = {});

/// The sewing germ A_{s,t}(x) = ∫_s^t ∫ p_{T-r}(x,y) f(V_r + P_{r-s}ψ)(y) dy dr
/// with ψ frozen at s, evaluated by left sums on the slices of V's time grid.
class SewingGerm {
 public:
  SewingGerm(const StochasticConvolution& v, DriftFn f, std::vector<double> psi, double T, int x_index);

  double operator()(int s_index, int t_index) const;
  /// δA_{s,u,t} = A_{s,t} - A_{s,u} - A_{u,t}.
  double delta(int s_index, int u_index, int t_index) const;

  const TimeGrid& tgrid() const { return v_.tgrid; }

 private:
  const StochasticConvolution& v_;
  DriftFn f_;
  std::vector<double> psi_hat_;
  double T_;
  int x_index_;
};

/// ψ used by the default germ: 0.5 cos(2πx) (cos(πx) for Neumann, a Gaussian on the line).
std::vector<double> default_germ_psi(const Grid1D& grid);

struct SewingSetup {
  double s = 0.5;
  double T = 1.0;
  std::vector<int> lag_exponents{2, 3, 4, 5, 6, 7};  // h = 2^{-k}
  double moment = 2.0;
  int x_index = -1;  // -1: middle node
};

/// Accumulates ‖A_{s,s+h}‖ and ‖δA_{s,s+h/2,s+h}‖ for each lag (one probe).
MomentAccumulator make_sewing_accumulator(const SewingSetup& setup);
void accumulate_sewing(MomentAccumulator& a_acc, MomentAccumulator& delta_acc, const StochasticConvolution& v,
                       const DriftFn& f, const SewingSetup& setup);

struct SewingRateReport {
  std::string germ_tag;
  double gamma_input = 0.0;
  double moment = 2.0;
  int realizations = 0;
  std::vector<double> lags;
  std::vector<double> a_norms;
  std::vector<double> delta_norms;
  ExponentFit a_slope;
  ExponentFit alpha1_hat;
  double slope_threshold = 0.0;  // 1 + γ/4 - 0.1
  bool slope_ok = false;
  bool delta_identically_zero = false;
  bool alpha1_ok = false;  // α1 > 1/2, true when δA vanishes identically
  bool pass = false;
};

SewingRateReport sewing_rate_report(const MomentAccumulator& a_acc, const MomentAccumulator& delta_acc,
                                    const SewingSetup& setup, double gamma, std::string germ_tag);

struct RiemannLimitReport {
  std::vector<int> levels;
  std::vector<double> sums;
  std::vector<double> differences;
  bool cauchy = false;
  double limit = 0.0;
};

/// Partition sums ∑ A_{t_i, t_{i+1}} of [0, t] with 2^l pieces, l in `levels` (each <= 12).
RiemannLimitReport riemann_sum_limit_check(const std::function<double(double, double)>& germ, double t,
                                           const std::vector<int>& levels);

/// Max over probes of ‖K_{t+h}(x) - K_t(x)‖_{L_m} and ‖K_t(x+δ) - K_t(x)‖_{L_m}.
struct HolderSetup {
  std::vector<int> time_steps{1, 2, 4, 8, 16, 32};
  std::vector<int> space_steps{1, 2, 4, 8, 16};
  double moment = 2.0;
  MomentProbe probe;
};

struct HolderAccumulators {
  MomentAccumulator time;
  MomentAccumulator space;
  void merge(const HolderAccumulators& o) {
    time.merge(o.time);
    space.merge(o.space);
  }
};

HolderAccumulators make_holder_accumulators(const Grid1D& grid, const TimeGrid& tgrid, const HolderSetup& setup);
void accumulate_holder(HolderAccumulators& acc, const FieldRows& K, const Grid1D& grid, const TimeGrid& tgrid,
                       const HolderSetup& setup);

struct HolderReport {
  ExponentFit time;
  ExponentFit space;
  std::vector<double> time_norms;
  std::vector<double> space_norms;
};

HolderReport holder_field_regularity(const HolderAccumulators& acc, const Grid1D& grid, const TimeGrid& tgrid);
HolderReport holder_field_regularity(const std::vector<FieldRows>& K_ensemble, const Grid1D& grid,
                                     const TimeGrid& tgrid, const HolderSetup& setup = {});

/// λ_{s,t}(x) = P_{T-t} w_{s,t}(x) with w from drift_integral_K(|b|).
struct ControlCheck {
  int triples = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of λ(s,u)+λ(u,t)-λ(s,t)
  double worst_additivity = 0.0;  // max |P_{t-u}w_{s,u} + w_{u,t} - w_{s,t}|
  bool superadditive = false;
  bool additive = false;
};

ControlCheck check_control(const FieldPath& path, const DriftFn& drift, int T_index, int time_stride = 8,
                           int x_stride = 4, double tol = 1e-8);

/// Empirical quantile (type 7) and a binomial order-statistic standard error.
struct QuantileEstimate {
  double value = 0.0;
  double stderr_q = 0.0;
};
QuantileEstimate empirical_quantile(std::vector<double> samples, double q);

/// "In probability" surrogate: the 90th percentile decreases along the ladder
/// up to one MC standard error.
struct QuantileLadder {
  std::vector<QuantileEstimate> quantiles;
  bool decreasing = false;
};
QuantileLadder quantile_ladder(const std::vector<std::vector<double>>& per_level, double q = 0.9);

}  // namespace shelab
