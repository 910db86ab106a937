#include "shelab/white_noise.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "shelab/kernels.hpp"
#include "shelab/spectral.hpp"

namespace shelab {

NoiseRealization::NoiseRealization(Grid1D grid, TimeGrid tgrid, std::uint64_t seed,
                                   std::uint64_t index, FieldRows cells)
    : grid_(std::move(grid)), tgrid_(tgrid), seed_(seed), index_(index), cells_(std::move(cells)) {
  if (cells_.rows != tgrid_.n_time() || cells_.cols != grid_.n_noise_cells()) {
    throw ShapeError("noise array does not match grids");
  }
}

std::vector<double> NoiseRealization::node_row(int m) const {
  const auto r = cell_row(m);
  std::vector<double> z(grid_.n_nodes());
  if (grid_.kind() != DomainKind::NeumannUnit) {
    z.assign(r.begin(), r.end());
    return z;
  }
  const int N = grid_.n_space();
  z[0] = r[0];
  for (int i = 1; i < N; ++i) z[i] = r[2 * i - 1] + r[2 * i];
  z[N] = r[2 * N - 1];
  return z;
}

NoiseRealization NoiseRealization::coarsened(bool space, bool time) const {
  Grid1D g = space ? grid_.coarsened() : grid_;
  TimeGrid tg = time ? tgrid_.coarsened() : tgrid_;
  FieldRows out(tg.n_time(), g.n_noise_cells());
  const int fs = space ? 2 : 1;
  const int ft = time ? 2 : 1;
  for (int m = 0; m < out.rows; ++m) {
    for (int c = 0; c < out.cols; ++c) {
      double s = 0.0;
      for (int a = 0; a < ft; ++a) {
        for (int b = 0; b < fs; ++b) s += cells_.at(ft * m + a, fs * c + b);
      }
      out.at(m, c) = s;
    }
  }
  return NoiseRealization(g, tg, seed_, index_, std::move(out));
}

NoiseRealization NoiseRealization::zero(const Grid1D& grid, const TimeGrid& tgrid) {
  return NoiseRealization(grid, tgrid, 0, 0, FieldRows(tgrid.n_time(), grid.n_noise_cells()));
}

NoiseRealization sample_noise(const Grid1D& grid, const TimeGrid& tgrid, std::uint64_t seed,
                              std::uint64_t index) {
  FieldRows cells(tgrid.n_time(), grid.n_noise_cells());
  const double scale = std::sqrt(tgrid.dt() * grid.noise_cell_width());
  kernels::fill_normals_serial(seed, index, 0, cells.rows, cells.cols, scale, cells.data.data());
  return NoiseRealization(grid, tgrid, seed, index, std::move(cells));
}

NoiseRealization restrict_noise(const NoiseRealization& fine, const Grid1D& grid, const TimeGrid& tgrid) {
  if (!(grid.setup() == fine.grid().setup()) || tgrid.horizon() != fine.tgrid().horizon()) {
    throw ShapeError("restrict_noise: incompatible setups");
  }
  NoiseRealization cur = fine;
  while (cur.grid().n_space() > grid.n_space() || cur.tgrid().n_time() > tgrid.n_time()) {
    cur = cur.coarsened(cur.grid().n_space() > grid.n_space(), cur.tgrid().n_time() > tgrid.n_time());
  }
  if (!(cur.grid() == grid) || !(cur.tgrid() == tgrid)) {
    throw ShapeError("restrict_noise: target grid is not a dyadic coarsening");
  }
  return cur;
}

PairedNoise pair_with_test(const NoiseRealization& noise, std::span<const double> phi_nodes, double t) {
  if (static_cast<int>(phi_nodes.size()) != noise.grid().n_nodes()) {
    throw ShapeError("pair_with_test: test function not sampled on the noise grid");
  }
  bool snapped = false;
  const int M = noise.tgrid().index_of(t, &snapped);
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto z = noise.node_row(m);
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * phi_nodes[i];
    total += s;
  }
  return {total, snapped};
}

std::vector<double> pair_with_test_path(const NoiseRealization& noise, std::span<const double> phi_nodes) {
  if (static_cast<int>(phi_nodes.size()) != noise.grid().n_nodes()) {
    throw ShapeError("pair_with_test: test function not sampled on the noise grid");
  }
  const int M = noise.tgrid().n_time();
  std::vector<double> path(M + 1, 0.0);
  for (int m = 0; m < M; ++m) {
    const auto z = noise.node_row(m);
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * phi_nodes[i];
    path[m + 1] = path[m] + s;
  }
  return path;
}

double ou_noise_factor(double lambda, double dt) {
  const double x = lambda * dt;
  if (x == 0.0) return 1.0;
  return std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x));
}

std::vector<double> convolution_variance(const Grid1D& grid, double t) {
  const int n = grid.n_nodes();
  std::vector<double> rho(n, 0.0);
  if (t <= 0.0) return rho;
  const SpectralBasis basis(grid);
  auto f = [t](double lam) { return lam == 0.0 ? t : -std::expm1(-2.0 * lam * t) / (2.0 * lam); };
  const auto lam = basis.lambda();
  if (grid.kind() == DomainKind::NeumannUnit) {
    const int N = grid.n_space();
    for (int i = 0; i < n; ++i) {
      const double x = grid.node(i);
      double s = t + f(lam[N]);
      for (int k = 1; k < N; ++k) {
        const double c = std::cos(std::numbers::pi * k * x);
        s += 2.0 * c * c * f(lam[k]);
      }
      rho[i] = s;
    }
    return rho;
  }
  double s = t;
  for (int k = 1; 2 * k < n; ++k) s += 2.0 * f(lam[k]);
  if (n % 2 == 0) s += f(lam[n / 2]);
  s /= grid.setup().extent();
  for (auto& r : rho) r = s;
  return rho;
}

std::shared_ptr<const FieldRows> convolution_variance_table(const Grid1D& grid, const TimeGrid& tgrid) {
  using Key = std::tuple<int, double, int, double, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const FieldRows>> cache;
  const Key key{static_cast<int>(grid.kind()), grid.setup().torus_width, grid.n_space(), tgrid.horizon(),
                tgrid.n_time()};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<FieldRows>(tgrid.n_time() + 1, grid.n_nodes());
  for (int m = 1; m <= tgrid.n_time(); ++m) {
    const auto r = convolution_variance(grid, tgrid.time(m));
    std::copy(r.begin(), r.end(), table->row(m).begin());
  }
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() > 32) cache.clear();
  cache.emplace(key, table);
  return table;
}

StochasticConvolution simulate_convolution(const NoiseRealization& noise) {
  const Grid1D& grid = noise.grid();
  const TimeGrid& tg = noise.tgrid();
  const int n = grid.n_nodes();
  const int M = tg.n_time();
  const double dt = tg.dt();
  const SpectralBasis basis(grid);
  const auto decay = basis.heat_multiplier(dt);
  std::vector<double> gain(n);
  for (int j = 0; j < n; ++j) gain[j] = ou_noise_factor(basis.lambda()[j], dt);
  const auto w = grid.weights();

  StochasticConvolution out{grid, tg, FieldRows(M + 1, n), FieldRows(M + 1, n), nullptr};
  std::vector<double> z(n), zc(n);
  for (int m = 0; m < M; ++m) {
    const auto zeta = noise.node_row(m);
    for (int i = 0; i < n; ++i) z[i] = zeta[i] / w[i];
    basis.forward(z, zc);
    auto prev = out.coef.row(m);
    auto next = out.coef.row(m + 1);
    for (int j = 0; j < n; ++j) next[j] = decay[j] * prev[j] + gain[j] * zc[j];
    basis.inverse(next, out.values.row(m + 1));
  }
  out.rho = convolution_variance_table(grid, tg);
  return out;
}

FieldRows simulate_convolution_euler(const NoiseRealization& noise) {
  const Grid1D& grid = noise.grid();
  const int n = grid.n_nodes();
  const int M = noise.tgrid().n_time();
  const SpectralBasis basis(grid);
  const auto decay = basis.heat_multiplier(noise.tgrid().dt());
  const auto w = grid.weights();
  FieldRows v(M + 1, n);
  std::vector<double> tmp(n), c(n);
  for (int m = 0; m < M; ++m) {
    const auto zeta = noise.node_row(m);
    const auto prev = v.row(m);
    for (int i = 0; i < n; ++i) tmp[i] = prev[i] + zeta[i] / w[i];
    basis.forward(tmp, c);
    for (int j = 0; j < n; ++j) c[j] *= decay[j];
    basis.inverse(c, v.row(m + 1));
  }
  return v;
}

std::vector<double> convolution_increment_residual(const StochasticConvolution& v, double s, double t) {
  if (s > t) throw std::domain_error("convolution_increment_residual needs s <= t");
  const int ms = v.tgrid.index_of(s);
  const int mt = v.tgrid.index_of(t);
  const SpectralBasis basis(v.grid);
  const auto mult = basis.heat_multiplier(v.tgrid.time(mt) - v.tgrid.time(ms));
  const auto cs = v.coef.row(ms);
  const auto ct = v.coef.row(mt);
  std::vector<double> c(basis.size());
  for (int j = 0; j < basis.size(); ++j) c[j] = ct[j] - mult[j] * cs[j];
  if (ms == mt) std::fill(c.begin(), c.end(), 0.0);
  return basis.inverse(c);
}

}  // namespace shelab
