#pragma once

#include <memory>
#include <span>
#include <vector>

#include "shelab/domain_grid.hpp"

namespace shelab {

inline constexpr double kKernelTol = 1e-14;

/// Truncation data for an image sum of g_t with the given period.
struct KernelEval {
  double t;
  double truncation_tol;
  int n_images;

  KernelEval(double t_, double period, double tol = kKernelTol);
};

double gaussian_kernel(double t, double x);

/// ∑_n g_t(d + n·period), d reduced to the fundamental cell first.
double periodized_gaussian(double t, double d, double period, double tol = kKernelTol);

double periodic_kernel(double t, double x, double y, double tol = kKernelTol);
double neumann_kernel(double t, double x, double y, double tol = kKernelTol);

/// Heat kernel of the grid's setup (whole line uses the torus of width L).
double domain_kernel(const Grid1D& grid, double t, double x, double y);

/// ∫_a^b p_t(x, y) dy from Gaussian CDF differences, images included.
double kernel_cell_mass(const Grid1D& grid, double t, double x, double a, double b);

enum class Representation { Spectral, KernelMatrix };

struct SemigroupOperator {
  Grid1D grid;
  double t;
  Representation representation = Representation::Spectral;
};

/// Row-major n_nodes x n_nodes matrix M with (P_t f)_i = ∑_j M_ij f_j.
/// Point samples w_j p_t(x_i, x_j) when t >= dx², exact cell masses otherwise.
std::shared_ptr<const std::vector<double>> kernel_matrix(const Grid1D& grid, double t);

std::vector<double> apply_semigroup(const SemigroupOperator& op, std::span<const double> f);

}  // namespace shelab
