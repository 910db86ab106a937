#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "shelab/domain_grid.hpp"
#include "shelab/field.hpp"

namespace shelab {

/// W over the cells of the grid (dx cells, or dx/2 half-cells for Neumann)
/// and the time slices of the time grid. Cell (m, c) has variance dt * width.
class NoiseRealization {
 public:
  NoiseRealization(Grid1D grid, TimeGrid tgrid, std::uint64_t seed, std::uint64_t index, FieldRows cells);

  const Grid1D& grid() const { return grid_; }
  const TimeGrid& tgrid() const { return tgrid_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return index_; }

  const FieldRows& cells() const { return cells_; }
  std::span<const double> cell_row(int m) const { return cells_.row(m); }

  /// Noise mass attached to each grid node during slice m.
  std::vector<double> node_row(int m) const;

  /// Block sums onto the 2x coarser grid in space and/or time.
  NoiseRealization coarsened(bool space, bool time) const;

  static NoiseRealization zero(const Grid1D& grid, const TimeGrid& tgrid);

 private:
  Grid1D grid_;
  TimeGrid tgrid_;
  std::uint64_t seed_;
  std::uint64_t index_;
  FieldRows cells_;
};

NoiseRealization sample_noise(const Grid1D& grid, const TimeGrid& tgrid, std::uint64_t seed,
                              std::uint64_t index);

/// Coarsen a fine realization until it lives on (grid, tgrid).
NoiseRealization restrict_noise(const NoiseRealization& fine, const Grid1D& grid, const TimeGrid& tgrid);

struct PairedNoise {
  double value;
  bool snapped;
};

/// W_t(φ) = ∑_{m < M} ∑_i ζ_{m,i} φ(x_i) with φ sampled at the nodes.
PairedNoise pair_with_test(const NoiseRealization& noise, std::span<const double> phi_nodes, double t);
/// W_{t_m}(φ) for every grid time.
std::vector<double> pair_with_test_path(const NoiseRealization& noise, std::span<const double> phi_nodes);

struct StochasticConvolution {
  Grid1D grid;
  TimeGrid tgrid;
  FieldRows values;  // V_{t_m}(x_i)
  FieldRows coef;    // spectral coefficients of each row
  std::shared_ptr<const FieldRows> rho;  // closed-form Var(V_{t_m}(x_i)), shared per grid
};

/// Exact-in-law OU update of every spectral mode.
StochasticConvolution simulate_convolution(const NoiseRealization& noise);

/// V_{m+1} = P_dt(V_m + ζ_m / w): the Euler convolution the spectral path is checked against.
FieldRows simulate_convolution_euler(const NoiseRealization& noise);

/// Var(V_t(x_i)) of the discrete scheme from the mode sums.
std::vector<double> convolution_variance(const Grid1D& grid, double t);
/// All grid times at once; cached per (grid, time grid).
std::shared_ptr<const FieldRows> convolution_variance_table(const Grid1D& grid, const TimeGrid& tgrid);

/// V_t - P_{t-s} V_s.
std::vector<double> convolution_increment_residual(const StochasticConvolution& v, double s, double t);

/// sqrt((1 - e^{-2λ dt}) / (2λ dt)), equal to 1 at λ = 0.
double ou_noise_factor(double lambda, double dt);

}  // namespace shelab
