#include "shelab/heat_kernel.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "shelab/kernels.hpp"
#include "shelab/spectral.hpp"

namespace shelab {

namespace {

void require_positive_time(double t) {
  if (!(t > 0.0)) throw std::domain_error("heat kernel needs t > 0");
}

// P(a < Z < b) for standard normal Z, accurate in both tails
double normal_interval(double a, double b) {
  const double r = 1.0 / std::numbers::sqrt2;
  if (a >= 0.0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
  return 1.0 - 0.5 * (std::erfc(-a * r) + std::erfc(b * r));
}

double reduce(double d, double period) { return d - period * std::round(d / period); }

// ∫_a^b ∑_n g_t(x - y + n·period) dy
double periodized_mass(double t, double x, double a, double b, double period) {
  const double shift = period * std::round((x - 0.5 * (a + b)) / period);
  x -= shift;
  const KernelEval ev(t, period);
  const double st = std::sqrt(t);
  double sum = 0.0;
  for (int n = -ev.n_images - 1; n <= ev.n_images + 1; ++n) {
    sum += normal_interval((a - x + n * period) / st, (b - x + n * period) / st);
  }
  return sum;
}

}  // namespace

KernelEval::KernelEval(double t_, double period, double tol) : t(t_), truncation_tol(tol) {
  require_positive_time(t_);
  const double arg = std::max(1.0, 1.0 / (tol * std::sqrt(2.0 * std::numbers::pi * t_)));
  const double reach = std::sqrt(2.0 * t_ * std::log(arg));
  n_images = static_cast<int>(std::ceil(reach / period)) + 1;
}

double gaussian_kernel(double t, double x) {
  require_positive_time(t);
  return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

double periodized_gaussian(double t, double d, double period, double tol) {
  const KernelEval ev(t, period, tol);
  const double r = reduce(d, period);
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
  auto g = [&](double z) { return c * std::exp(-z * z / (2.0 * t)); };
  double sum = g(r);
  for (int n = 1; n <= ev.n_images; ++n) sum += g(r + n * period) + g(r - n * period);
  return sum;
}

double periodic_kernel(double t, double x, double y, double tol) {
  return periodized_gaussian(t, x - y, 1.0, tol);
}

double neumann_kernel(double t, double x, double y, double tol) {
  return periodized_gaussian(t, x - y, 2.0, tol) + periodized_gaussian(t, x + y, 2.0, tol);
}

double domain_kernel(const Grid1D& grid, double t, double x, double y) {
  switch (grid.kind()) {
    case DomainKind::PeriodicUnit: return periodic_kernel(t, x, y);
    case DomainKind::NeumannUnit: return neumann_kernel(t, x, y);
    case DomainKind::WholeLine: return periodized_gaussian(t, x - y, grid.setup().torus_width);
  }
  return 0.0;
}

double kernel_cell_mass(const Grid1D& grid, double t, double x, double a, double b) {
  require_positive_time(t);
  switch (grid.kind()) {
    case DomainKind::PeriodicUnit: return periodized_mass(t, x, a, b, 1.0);
    case DomainKind::WholeLine: return periodized_mass(t, x, a, b, grid.setup().torus_width);
    case DomainKind::NeumannUnit:
      // reflected image: y -> -y maps [a,b] to [-b,-a]
      return periodized_mass(t, x, a, b, 2.0) + periodized_mass(t, x, -b, -a, 2.0);
  }
  return 0.0;
}

namespace {

using CacheKey = std::tuple<int, double, int, double>;
std::mutex cache_mutex;
std::map<CacheKey, std::shared_ptr<const std::vector<double>>> matrix_cache;

std::shared_ptr<const std::vector<double>> build_matrix(const Grid1D& grid, double t) {
  const int n = grid.n_nodes();
  const double dx = grid.dx();
  auto m = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * n);
  const auto w = grid.weights();
  const bool sampled = t >= dx * dx;
  for (int i = 0; i < n; ++i) {
    const double xi = grid.node(i);
    for (int j = 0; j < n; ++j) {
      const double xj = grid.node(j);
      double v;
      if (sampled) {
        v = w[j] * domain_kernel(grid, t, xi, xj);
      } else {
        double a = xj - 0.5 * dx, b = xj + 0.5 * dx;
        if (grid.kind() == DomainKind::NeumannUnit) {
          a = std::max(a, 0.0);
          b = std::min(b, 1.0);
        }
        v = kernel_cell_mass(grid, t, xi, a, b);
      }
      (*m)[static_cast<std::size_t>(i) * n + j] = v;
    }
  }
  return m;
}

}  // namespace

std::shared_ptr<const std::vector<double>> kernel_matrix(const Grid1D& grid, double t) {
  require_positive_time(t);
  const CacheKey key{static_cast<int>(grid.kind()), grid.setup().torus_width, grid.n_space(), t};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = matrix_cache.find(key);
    if (it != matrix_cache.end()) return it->second;
  }
  auto m = build_matrix(grid, t);
  std::lock_guard<std::mutex> lock(cache_mutex);
  if (matrix_cache.size() > 64) matrix_cache.clear();
  matrix_cache.emplace(key, m);
  return m;
}

std::vector<double> apply_semigroup(const SemigroupOperator& op, std::span<const double> f) {
  const int n = op.grid.n_nodes();
  if (static_cast<int>(f.size()) != n) throw ShapeError("apply_semigroup: field does not match grid");
  if (op.t < 0.0) throw std::domain_error("apply_semigroup needs t >= 0");
  std::vector<double> out(f.begin(), f.end());
  if (op.t == 0.0) return out;
  if (op.representation == Representation::KernelMatrix) {
    auto m = kernel_matrix(op.grid, op.t);
    kernels::matvec_serial(m->data(), n, n, f.data(), out.data());
    return out;
  }
  const SpectralBasis basis(op.grid);
  auto c = basis.forward(f);
  const auto mult = basis.heat_multiplier(op.t);
  for (int j = 0; j < n; ++j) c[j] *= mult[j];
  basis.inverse(c, out);
  return out;
}

}  // namespace shelab
