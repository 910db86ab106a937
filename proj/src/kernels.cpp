#include "shelab/kernels.hpp"

#include <vector>

#include "shelab/rng.hpp"

namespace shelab::kernels {

namespace {

inline double dot(const double* a, const double* x, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += a[j] * x[j];
  return s;
}

inline void normals_row(std::uint64_t seed, std::uint64_t stream, int row, int cells, double scale,
                        double* out) {
  for (int c = 0; c < cells; c += 2) {
    const auto z = normal_pair(seed, stream, static_cast<std::uint32_t>(row),
                               static_cast<std::uint32_t>(c / 2));
    out[c] = scale * z[0];
    if (c + 1 < cells) out[c + 1] = scale * z[1];
  }
}

inline void spectral_row(const SpectralBasis& basis, std::span<const double> mult, double* row,
                         std::vector<double>& coef) {
  const int n = basis.size();
  coef.resize(n);
  basis.forward(std::span<const double>(row, n), coef);
  for (int j = 0; j < n; ++j) coef[j] *= mult[j];
  basis.inverse(coef, std::span<double>(row, n));
}

}  // namespace

void matvec_serial(const double* a, int rows, int cols, const double* x, double* y) {
  for (int i = 0; i < rows; ++i) y[i] = dot(a + static_cast<std::size_t>(i) * cols, x, cols);
}

void matvec_omp(const double* a, int rows, int cols, const double* x, double* y, int workers) {
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int i = 0; i < rows; ++i) y[i] = dot(a + static_cast<std::size_t>(i) * cols, x, cols);
}

void fill_normals_serial(std::uint64_t seed, std::uint64_t stream, int m0, int rows, int cells,
                         double scale, double* out) {
  for (int m = 0; m < rows; ++m) {
    normals_row(seed, stream, m0 + m, cells, scale, out + static_cast<std::size_t>(m) * cells);
  }
}

void fill_normals_omp(std::uint64_t seed, std::uint64_t stream, int m0, int rows, int cells,
                      double scale, double* out, int workers) {
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int m = 0; m < rows; ++m) {
    normals_row(seed, stream, m0 + m, cells, scale, out + static_cast<std::size_t>(m) * cells);
  }
}

void spectral_rows_serial(const SpectralBasis& basis, std::span<const double> mult, double* rows,
                          int n_rows) {
  std::vector<double> coef;
  for (int r = 0; r < n_rows; ++r) {
    spectral_row(basis, mult, rows + static_cast<std::size_t>(r) * basis.size(), coef);
  }
}

void spectral_rows_omp(const SpectralBasis& basis, std::span<const double> mult, double* rows,
                       int n_rows, int workers) {
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> coef;
#pragma omp for schedule(static)
    for (int r = 0; r < n_rows; ++r) {
      spectral_row(basis, mult, rows + static_cast<std::size_t>(r) * basis.size(), coef);
    }
  }
}

}  // namespace shelab::kernels
