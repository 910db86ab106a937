#pragma once

#include <cstdint>
#include <span>

#include "shelab/spectral.hpp"

// Hot loops in two flavours. The *_serial versions are the reference used by
// library code and tests; the *_omp versions must produce bit-identical
// results for any thread count (every output element is computed by exactly
// one thread with the same operation order).
namespace shelab::kernels {

void matvec_serial(const double* a, int rows, int cols, const double* x, double* y);
void matvec_omp(const double* a, int rows, int cols, const double* x, double* y, int workers);

/// rows x cells standard normals scaled by `scale`, cell c of row m taken from
/// the Philox block (seed, stream, row = m0 + m, slot = c / 2).
void fill_normals_serial(std::uint64_t seed, std::uint64_t stream, int m0, int rows, int cells,
                         double scale, double* out);
void fill_normals_omp(std::uint64_t seed, std::uint64_t stream, int m0, int rows, int cells,
                      double scale, double* out, int workers);

/// Apply the diagonal multiplier to each of `n_rows` consecutive fields in place.
void spectral_rows_serial(const SpectralBasis& basis, std::span<const double> mult, double* rows,
                          int n_rows);
void spectral_rows_omp(const SpectralBasis& basis, std::span<const double> mult, double* rows,
                       int n_rows, int workers);

}  // namespace shelab::kernels
