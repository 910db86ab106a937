#pragma once

#include <span>
#include <vector>

#include "shelab/domain_grid.hpp"

namespace shelab {

/// Eigenbasis of the grid Laplacian. Periodic and whole-line grids use the
/// real discrete Fourier basis (FFTW halfcomplex layout), Neumann grids the
/// DCT-I on the n_space + 1 nodes.
class SpectralBasis {
 public:
  explicit SpectralBasis(const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  int size() const { return n_; }

  void forward(std::span<const double> field, std::span<double> coef) const;
  /// Normalized inverse: inverse(forward(f)) == f.
  void inverse(std::span<const double> coef, std::span<double> field) const;

  std::vector<double> forward(std::span<const double> field) const;
  std::vector<double> inverse(std::span<const double> coef) const;

  /// ½ω² for the continuous eigenfunction sampled in each coefficient slot.
  std::span<const double> lambda() const { return lambda_; }
  /// ½ times the eigenvalue of the 3-point Laplacian in each slot.
  std::span<const double> discrete_lambda() const { return discrete_lambda_; }
  /// Wavenumber index of each slot (|k| for periodic layouts).
  std::span<const int> mode_index() const { return mode_; }

  /// exp(-λ t) per slot.
  std::vector<double> heat_multiplier(double t) const;

 private:
  Grid1D grid_;
  int n_;
  std::vector<double> lambda_;
  std::vector<double> discrete_lambda_;
  std::vector<int> mode_;
};

/// Shared, thread-safe FFTW r2r plans (planning is serialized, execution is not).
namespace fft {
enum class Kind { R2HC, HC2R, REDFT00 };
void execute(Kind kind, int n, const double* in, double* out);
}  // namespace fft

}  // namespace shelab
