#pragma once

#include <span>
#include <string>
#include <vector>

#include "shelab/domain_grid.hpp"
#include "shelab/drift.hpp"
#include "shelab/field.hpp"
#include "shelab/spectral.hpp"
#include "shelab/white_noise.hpp"

namespace shelab {

enum class SchemeKind { SplittingExact, SemiImplicit };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

/// The drift must already be bounded (a mollified drift or a bounded function).
struct SchemeSpec {
  SchemeKind kind = SchemeKind::SplittingExact;
  DriftFn drift;
};

/// One realization of u with its decomposition u = P_t u0 + K + V.
struct FieldPath {
  Grid1D grid;
  TimeGrid tgrid;
  std::vector<double> u0;
  FieldRows u;
  FieldRows K;
  FieldRows pu0;  // P_{t_m} u0
  StochasticConvolution V;
  bool aborted = false;
  std::string flag;
};

/// Spectral state of a scheme at t_m.
struct SchemeState {
  int m = 0;
  std::vector<double> u;
  std::vector<double> u_hat;
  std::vector<double> k_hat;
  std::vector<double> v_hat;
  std::vector<double> p_hat;
};

class Scheme {
 public:
  Scheme(SchemeSpec spec, const Grid1D& grid, const TimeGrid& tgrid);

  SchemeState initial(std::span<const double> u0) const;
  /// Advance one slice with the node noise of row m. Returns false (state
  /// untouched) if the drift produced a non-finite value.
  bool step(SchemeState& state, std::span<const double> noise_nodes) const;

  const SpectralBasis& basis() const { return basis_; }
  std::vector<double> real(std::span<const double> coef) const { return basis_.inverse(coef); }

 private:
  SchemeSpec spec_;
  Grid1D grid_;
  TimeGrid tgrid_;
  SpectralBasis basis_;
  std::vector<double> decay_;
  std::vector<double> gain_;
  std::vector<double> resolvent_;
};

FieldPath simulate_path(const SchemeSpec& spec, const NoiseRealization& noise, std::span<const double> u0);

/// Drift integral with the kernel integrated exactly over each time slice.
struct DriftIntegral {
  double value;
  bool diverged;
};
inline constexpr double kDivergenceSentinel = 1e12;

/// Q_{s,t}(x_i) = ∫_s^t ∫ p_{t-r}(x_i, y) drift(u_r(y)) dy dr.
DriftIntegral drift_integral_K(const FieldPath& path, const DriftFn& drift, double s, double t, int x_index);
std::vector<double> drift_integral_field(const FieldPath& path, const DriftFn& drift, int s_index, int t_index);
/// Rows m = 0..M of Q_{s,t_m} (zero for m <= s_index).
FieldRows drift_integral_rows(const FieldPath& path, const DriftFn& drift, int s_index = 0);

double mild_residual(const FieldPath& path, const DriftFn& drift, double t, int x_index);
/// u_t - P_t u0 - Q_{0,t} - V_t at every node, every grid time.
FieldRows mild_residual_rows(const FieldPath& path, const DriftFn& drift);

/// w_{s,t} = Q_{s,t} with |drift|.
std::vector<double> random_control(const FieldPath& path, const DriftFn& drift, int s_index, int t_index);

/// Probe lattice for sup-type statistics: all grid times, every x_stride-th node.
struct ProbeLattice {
  int x_stride = 4;
  int t_stride = 1;
};

struct CauchyReport {
  std::vector<double> levels;
  std::vector<double> differences;  // consecutive pairs
  bool monotone = false;
  ProbeLattice probe;
};

/// sup over the probe lattice of |K^{n_i} - K^{n_{i+1}}| along the path.
CauchyReport regularized_mild_limit_check(const DriftSpec& base, const std::vector<double>& levels,
                                          const FieldPath& path, const ProbeLattice& probe = {});

/// Default mollification level tied to the grid: 1/n = max(dt, dx²).
double grid_mollification_level(const Grid1D& grid, const TimeGrid& tgrid);

std::vector<double> constant_field(const Grid1D& grid, double value);

}  // namespace shelab
