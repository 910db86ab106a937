#include "shelab/weak_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shelab/heat_kernel.hpp"
#include "shelab/spectral.hpp"
#include "shelab/white_noise.hpp"

namespace shelab {

namespace {

constexpr int kMaxOrder = 12;

// ψ_0..ψ_kmax at x by the three-term recurrence.
std::vector<double> hermite_functions(int kmax, double x) {
  std::vector<double> psi(kmax + 1, 0.0);
  psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (kmax >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int k = 1; k < kmax; ++k) {
    psi[k + 1] = std::sqrt(2.0 / (k + 1)) * x * psi[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * psi[k - 1];
  }
  return psi;
}

// r-th derivative of ψ_k via ψ_j' = sqrt(j/2) ψ_{j-1} - sqrt((j+1)/2) ψ_{j+1}.
double hermite_derivative(int k, int r, double x) {
  const int top = k + r + 1;
  std::vector<double> c(top + 1, 0.0), next(top + 1);
  c[k] = 1.0;
  for (int step = 0; step < r; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int j = 0; j < top; ++j) {
      if (c[j] == 0.0) continue;
      if (j > 0) next[j - 1] += c[j] * std::sqrt(0.5 * j);
      next[j + 1] -= c[j] * std::sqrt(0.5 * (j + 1));
    }
    c.swap(next);
  }
  const auto psi = hermite_functions(top, x);
  double v = 0.0;
  for (int j = 0; j <= top; ++j) v += c[j] * psi[j];
  return v;
}

// d^r/dx^r exp(-(x-c)²/(2w²)) = (-1/w)^r He_r(z) e^{-z²/2}.
double gaussian_derivative(double d, double w, int r) {
  const double z = d / w;
  if (std::abs(z) > 40.0) return 0.0;
  double h0 = 1.0, h1 = z;
  double he = r == 0 ? h0 : h1;
  for (int n = 1; n < r; ++n) {
    const double h2 = z * h1 - n * h0;
    h0 = h1;
    h1 = h2;
    he = h2;
  }
  return std::pow(-1.0 / w, r) * he * std::exp(-0.5 * z * z);
}

double bump_derivative(double x, double c, double w, DomainKind ext, int r) {
  if (ext == DomainKind::WholeLine) return gaussian_derivative(x - c, w, r);
  const int reach = static_cast<int>(std::ceil(40.0 * w)) + 1;
  double v = 0.0;
  if (ext == DomainKind::PeriodicUnit) {
    for (int n = -reach; n <= reach; ++n) v += gaussian_derivative(x - c + n, w, r);
  } else {
    // even reflection about 0 and 1: images ±c + 2n
    for (int n = -reach; n <= reach; ++n) {
      v += gaussian_derivative(x - c + 2.0 * n, w, r) + gaussian_derivative(x + c + 2.0 * n, w, r);
    }
  }
  return v;
}

double weighted_pair(const Grid1D& grid, std::span<const double> f, std::span<const double> g, bool window) {
  const auto w = grid.weights();
  const bool restrict = window && grid.kind() == DomainKind::WholeLine;
  double s = 0.0;
  for (int i = 0; i < grid.n_nodes(); ++i) {
    if (restrict && !grid.in_window(i)) continue;
    s += w[i] * f[i] * g[i];
  }
  return s;
}

void check_same_grids(const FieldPath& path, const NoiseRealization& noise) {
  if (!(path.grid == noise.grid()) || !(path.tgrid == noise.tgrid())) {
    throw ShapeError("noise realization does not live on the path grid");
  }
}

int grid_index(const TimeGrid& tg, double t) {
  bool snapped = false;
  const int m = tg.index_of(t, &snapped);
  if (snapped) throw std::domain_error("time is not on the grid");
  return m;
}

double trapezoid(std::span<const double> g, int M, double dt) {
  if (M == 0) return 0.0;
  double s = 0.5 * (g[0] + g[M]);
  for (int m = 1; m < M; ++m) s += g[m];
  return s * dt;
}

}  // namespace

TestFunction TestFunction::trig(int k, bool sine) {
  if (k < 0) throw std::invalid_argument("trig index must be >= 0");
  TestFunction f;
  f.family_ = TestFamily::TrigPeriodic;
  f.k_ = k;
  f.sine_ = sine;
  return f;
}

TestFunction TestFunction::cosine(int k) {
  if (k < 0) throw std::invalid_argument("cosine index must be >= 0");
  TestFunction f;
  f.family_ = TestFamily::CosineNeumann;
  f.k_ = k;
  f.extension_ = DomainKind::NeumannUnit;
  return f;
}

TestFunction TestFunction::hermite(int k) {
  if (k < 0) throw std::invalid_argument("hermite index must be >= 0");
  TestFunction f;
  f.family_ = TestFamily::HermiteWholeLine;
  f.k_ = k;
  f.extension_ = DomainKind::WholeLine;
  return f;
}

TestFunction TestFunction::bump(double center, double width, DomainKind extension) {
  if (!(width > 0.0)) throw std::invalid_argument("bump width must be positive");
  TestFunction f;
  f.family_ = TestFamily::GaussianBump;
  f.center_ = center;
  f.width_ = width;
  f.extension_ = extension;
  return f;
}

std::string TestFunction::name() const {
  switch (family_) {
    case TestFamily::TrigPeriodic: return (sine_ ? "sin" : "cos") + std::to_string(k_);
    case TestFamily::CosineNeumann: return "ncos" + std::to_string(k_);
    case TestFamily::HermiteWholeLine: return "hermite" + std::to_string(k_);
    case TestFamily::GaussianBump: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "bump(%g,%g)", center_, width_);
      return buf;
    }
  }
  return "?";
}

bool TestFunction::compatible(DomainKind kind) const {
  switch (family_) {
    case TestFamily::TrigPeriodic: return kind == DomainKind::PeriodicUnit;
    case TestFamily::CosineNeumann: return kind == DomainKind::NeumannUnit;
    case TestFamily::HermiteWholeLine: return kind == DomainKind::WholeLine;
    case TestFamily::GaussianBump: return kind == extension_;
  }
  return false;
}

double TestFunction::derivative(double x, int order) const {
  if (order < 0 || order > kMaxOrder) throw std::domain_error("derivative order outside [0, 12]");
  switch (family_) {
    case TestFamily::TrigPeriodic: {
      const double w = 2.0 * std::numbers::pi * k_;
      const double phase = w * x + 0.5 * std::numbers::pi * order;
      return std::pow(w, order) * (sine_ ? std::sin(phase) : std::cos(phase));
    }
    case TestFamily::CosineNeumann: {
      const double w = std::numbers::pi * k_;
      return std::pow(w, order) * std::cos(w * x + 0.5 * std::numbers::pi * order);
    }
    case TestFamily::HermiteWholeLine: return hermite_derivative(k_, order, x);
    case TestFamily::GaussianBump: return bump_derivative(x, center_, width_, extension_, order);
  }
  return 0.0;
}

std::vector<double> TestFunction::sample(const Grid1D& grid, int order) const {
  if (!compatible(grid.kind())) throw std::invalid_argument("test function " + name() + " does not fit this domain");
  std::vector<double> v(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) v[i] = derivative(grid.node(i), order);
  return v;
}

std::vector<TestFunction> default_test_family(const DomainSetup& setup, bool with_bumps) {
  std::vector<TestFunction> fs;
  switch (setup.kind) {
    case DomainKind::PeriodicUnit:
      for (int k = 0; k <= 16; ++k) {
        fs.push_back(TestFunction::trig(k));
        if (k > 0) fs.push_back(TestFunction::trig(k, true));
      }
      break;
    case DomainKind::NeumannUnit:
      for (int k = 0; k <= 16; ++k) fs.push_back(TestFunction::cosine(k));
      break;
    case DomainKind::WholeLine:
      for (int k = 0; k <= 12; ++k) fs.push_back(TestFunction::hermite(k));
      break;
  }
  if (with_bumps) {
    for (int i = 0; i < 8; ++i) {
      if (setup.kind == DomainKind::WholeLine) {
        fs.push_back(TestFunction::bump(-1.75 + 0.5 * i, 0.25, setup.kind));
      } else {
        fs.push_back(TestFunction::bump((i + 0.5) / 8.0, 0.05, setup.kind));
      }
    }
  }
  return fs;
}

double pair_nodes(const Grid1D& grid, std::span<const double> f, std::span<const double> phi_nodes, bool window) {
  if (static_cast<int>(f.size()) != grid.n_nodes() || static_cast<int>(phi_nodes.size()) != grid.n_nodes()) {
    throw ShapeError("pair: field does not match grid");
  }
  return weighted_pair(grid, f, phi_nodes, window);
}

double pair(const Grid1D& grid, std::span<const double> f, const TestFunction& phi, bool window) {
  const auto p = phi.sample(grid);
  return pair_nodes(grid, f, p, window);
}

double schwartz_seminorm(const TestFunction& phi, int m, const DomainSetup& setup) {
  if (m < 0 || m > 8) throw std::domain_error("seminorm order outside [0, 8]");
  if (!phi.compatible(setup.kind)) throw std::invalid_argument("test function does not fit this domain");
  auto integrand = [&](double x) {
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double d = phi.derivative(x, i);
      s += d * d;
    }
    const double weight = 1.0 + std::pow(std::abs(x), m);
    return weight * weight * s;
  };
  using boost::math::quadrature::gauss_kronrod;
  if (setup.kind != DomainKind::WholeLine) {
    // subdivide so that high-frequency members are resolved
    const int pieces = 4 + 2 * phi.index();
    double total = 0.0;
    for (int p = 0; p < pieces; ++p) {
      total += gauss_kronrod<double, 31>::integrate(integrand, double(p) / pieces, double(p + 1) / pieces, 10, 1e-13);
    }
    return total;
  }
  double total = 0.0;
  for (double a = -30.0; a < 30.0; a += 0.5) total += gauss_kronrod<double, 31>::integrate(integrand, a, a + 0.5, 10, 1e-13);
  return total;
}

WeakResidualReport weak_residual_report(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                                        const TestFunction& phi, DriftTerm term) {
  check_same_grids(path, noise);
  const Grid1D& grid = path.grid;
  const int M = path.tgrid.n_time();
  const double dt = path.tgrid.dt();
  const auto p0 = phi.sample(grid);
  auto p2 = phi.sample(grid, 2);
  for (auto& v : p2) v *= 0.5;
  const auto wpath = pair_with_test_path(noise, p0);

  std::vector<double> a(M + 1), l(M + 1), d(M + 1), b(grid.n_nodes());
  for (int m = 0; m <= M; ++m) {
    const auto u = path.u.row(m);
    a[m] = weighted_pair(grid, u, p0, false);
    l[m] = weighted_pair(grid, u, p2, false);
    for (int i = 0; i < grid.n_nodes(); ++i) b[i] = drift(u[i]);
    d[m] = weighted_pair(grid, b, p0, false);
  }

  WeakResidualReport rep;
  rep.phi = phi.name();
  rep.drift_term_used = term;
  double heat = 0.0, dint = 0.0;
  for (int m = 0; m <= M; ++m) {
    if (m > 0) {
      heat += 0.5 * dt * (l[m - 1] + l[m]);
      dint += term == DriftTerm::DirectIntegral ? 0.5 * dt * (d[m - 1] + d[m]) : dt * d[m - 1];
    }
    rep.times.push_back(path.tgrid.time(m));
    rep.residuals.push_back(m == 0 ? 0.0 : a[m] - a[0] - heat - dint - wpath[m]);
  }
  return rep;
}

double weak_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                     const TestFunction& phi, double t) {
  const int M = grid_index(path.tgrid, t);
  return weak_residual_report(path, noise, drift, phi).residuals[M];
}

double time_dependent_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                               const TestFunction& phi, double t) {
  check_same_grids(path, noise);
  const Grid1D& grid = path.grid;
  const int M = grid_index(path.tgrid, t);
  const double dt = path.tgrid.dt();
  const int n = grid.n_nodes();
  const SpectralBasis basis(grid);
  const auto phat = basis.forward(phi.sample(grid));

  std::vector<double> g(M + 1), b(n), coef(n), f(n);
  double noise_term = 0.0, initial = 0.0;
  for (int m = 0; m <= M; ++m) {
    const auto e = basis.heat_multiplier((M - m) * dt);
    for (int j = 0; j < n; ++j) coef[j] = e[j] * phat[j];
    basis.inverse(coef, f);
    const auto u = path.u.row(m);
    if (m == 0) initial = weighted_pair(grid, u, f, false);
    for (int i = 0; i < n; ++i) b[i] = drift(u[i]);
    g[m] = weighted_pair(grid, b, f, false);
    if (m < M) {
      const auto z = noise.node_row(m);
      for (int i = 0; i < n; ++i) noise_term += z[i] * f[i];
    }
  }
  const double final_pair = weighted_pair(grid, path.u.row(M), phi.sample(grid), false);
  return final_pair - initial - trapezoid(g, M, dt) - noise_term;
}

double semigroup_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                          const TestFunction& phi, double t) {
  check_same_grids(path, noise);
  const Grid1D& grid = path.grid;
  const int M = grid_index(path.tgrid, t);
  const double dt = path.tgrid.dt();
  const int n = grid.n_nodes();
  const SpectralBasis basis(grid);
  const auto p = phi.sample(grid);
  const auto w = grid.weights();

  auto propagate = [&](std::span<const double> field, double s, std::vector<double>& out) {
    auto c = basis.forward(field);
    const auto e = basis.heat_multiplier(s);
    for (int j = 0; j < n; ++j) c[j] *= e[j];
    basis.inverse(c, out);
  };

  std::vector<double> tmp(n), b(n), z(n), g(M + 1);
  propagate(path.u0, M * dt, tmp);
  const double initial = weighted_pair(grid, tmp, p, false);
  double noise_term = 0.0;
  for (int m = 0; m <= M; ++m) {
    const auto u = path.u.row(m);
    for (int i = 0; i < n; ++i) b[i] = drift(u[i]);
    propagate(b, (M - m) * dt, tmp);
    g[m] = weighted_pair(grid, tmp, p, false);
    if (m < M) {
      const auto zr = noise.node_row(m);
      for (int i = 0; i < n; ++i) z[i] = zr[i] / w[i];
      propagate(z, (M - m) * dt, tmp);
      noise_term += weighted_pair(grid, tmp, p, false);
    }
  }
  return weighted_pair(grid, path.u.row(M), p, false) - initial - trapezoid(g, M, dt) - noise_term;
}

DriftFunctional::DriftFunctional(const FieldPath& path, const DriftFn& drift)
    : grid_(path.grid), tgrid_(path.tgrid), b_(path.u.rows, path.u.cols) {
  for (std::size_t k = 0; k < b_.data.size(); ++k) b_.data[k] = drift(path.u.data[k]);
}

double DriftFunctional::increment(int m0, int m1, std::span<const double> phi) const {
  if (m0 < 0 || m1 > tgrid_.n_time() || m0 > m1) throw std::out_of_range("drift functional: bad time indices");
  double s = 0.0;
  for (int m = m0; m < m1; ++m) s += weighted_pair(grid_, b_.row(m), phi, false);
  return s * tgrid_.dt();
}

namespace {

int slice_ratio(const TimeGrid& tg, int n) {
  if (n < 1) throw std::invalid_argument("riemann level must be >= 1");
  const double r = 1.0 / (n * tg.dt());
  const long rr = std::lround(r);
  if (rr < 1 || std::abs(r - rr) > 1e-9 * r) throw std::invalid_argument("1/n must be a multiple of the path time step");
  return static_cast<int>(rr);
}

int slice_count(double t, int n) { return static_cast<int>(std::floor(n * t + 1e-9)); }

}  // namespace

double riemann_nonlinear_integral(const TimeFunctional& H, const TimeTestFunction& f, double t, int n) {
  const int r = slice_ratio(H.tgrid(), n);
  const int count = slice_count(t, n);
  if (count * r > H.tgrid().n_time()) throw std::domain_error("riemann sum runs past the path horizon");
  double s = 0.0;
  for (int i = 1; i <= count; ++i) {
    const auto fi = f(static_cast<double>(i - 1) / n);
    s += H.increment((i - 1) * r, i * r, fi);
  }
  return s;
}

std::string to_string(ExtrapolationModel model) {
  switch (model) {
    case ExtrapolationModel::Linear: return "R0 + b*eps";
    case ExtrapolationModel::Sqrt: return "R0 + a*sqrt(eps)";
    case ExtrapolationModel::SqrtLinear: return "R0 + a*sqrt(eps) + b*eps";
  }
  return "?";
}

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values, ExtrapolationModel model) {
  if (eps.size() != values.size() || eps.empty()) throw std::invalid_argument("extrapolation needs matching data");
  const std::size_t take = std::min<std::size_t>(3, eps.size());
  const std::size_t first = eps.size() - take;
  std::vector<std::vector<double>> basis;
  for (std::size_t k = first; k < eps.size(); ++k) {
    std::vector<double> row{1.0};
    if (model != ExtrapolationModel::Linear) row.push_back(std::sqrt(eps[k]));
    if (model != ExtrapolationModel::Sqrt) row.push_back(eps[k]);
    basis.push_back(row);
  }
  const std::size_t p = std::min(basis[0].size(), take);
  // normal equations, tiny and well scaled enough for Gaussian elimination
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t k = 0; k < take; ++k) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += basis[k][i] * basis[k][j];
      a[i][p] += basis[k][i] * values[first + k];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    if (a[c][c] == 0.0) throw std::domain_error("extrapolation system is singular");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= p; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return a[0][p] / a[0][0];
}

ReconstructionReport reconstruct_R(const TimeFunctional& H, double t, int x_index, const std::vector<double>& epsilons,
                                   const FieldPath* path, ExtrapolationModel model) {
  const Grid1D& grid = H.grid();
  const TimeGrid& tg = H.tgrid();
  const double dt = tg.dt();
  if (epsilons.empty()) throw std::invalid_argument("reconstruct_R needs at least one epsilon");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (epsilons[k] < 2.0 * dt * (1.0 - 1e-9)) throw std::domain_error("epsilon below 2 dt");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw std::invalid_argument("epsilons must decrease");
  }
  if (x_index < 0 || x_index >= grid.n_nodes()) throw std::out_of_range("reconstruct_R: x index");
  // slices of the path grid itself: level n = 1/dt
  const int n = static_cast<int>(std::lround(1.0 / dt));
  slice_ratio(tg, n);
  const int Mt = grid_index(tg, t);
  const double x = grid.node(x_index);

  const int max_count = slice_count(t - epsilons.back(), n);
  std::vector<double> prefix(max_count + 1, 0.0), f(grid.n_nodes());
  for (int i = 1; i <= max_count; ++i) {
    const double lag = (Mt - (i - 1)) * dt;
    for (int j = 0; j < grid.n_nodes(); ++j) f[j] = domain_kernel(grid, lag, x, grid.node(j));
    prefix[i] = prefix[i - 1] + H.increment(i - 1, i, f);
  }

  ReconstructionReport rep;
  rep.epsilons = epsilons;
  rep.model = model;
  for (double e : epsilons) rep.values.push_back(prefix[slice_count(t - e, n)]);
  for (std::size_t k = 0; k + 1 < rep.values.size(); ++k) {
    rep.cauchy_differences.push_back(std::abs(rep.values[k + 1] - rep.values[k]));
  }
  rep.cauchy = true;
  for (std::size_t k = 1; k < rep.cauchy_differences.size(); ++k) {
    if (rep.cauchy_differences[k] > rep.cauchy_differences[k - 1] * (1.0 + 1e-9) && rep.cauchy_differences[k] > 1e-13) {
      rep.cauchy = false;
    }
  }
  rep.extrapolated = extrapolate_to_zero(rep.epsilons, rep.values, model);
  if (path) {
    rep.cross_check = path->u.at(Mt, x_index) - path->pu0.at(Mt, x_index) - path->V.values.at(Mt, x_index);
    rep.discrepancy = std::abs(rep.extrapolated - rep.cross_check);
  }
  return rep;
}

SeminormDomination fit_seminorm_domination(const FieldPath& path, const std::vector<TestFunction>& family) {
  const Grid1D& grid = path.grid;
  const int F = static_cast<int>(family.size());
  if (F < 2) throw std::invalid_argument("seminorm domination needs at least two test functions");
  std::vector<double> sup(F, 0.0);
  for (int k = 0; k < F; ++k) {
    const auto p = family[k].sample(grid);
    for (int m = 0; m < path.u.rows; ++m) sup[k] = std::max(sup[k], std::abs(weighted_pair(grid, path.u.row(m), p, true)));
  }
  SeminormDomination best;
  for (int order = 0; order <= 8; ++order) {
    std::vector<double> norm(F);
    for (int k = 0; k < F; ++k) norm[k] = schwartz_seminorm(family[k], order, grid.setup());
    double gamma = 0.0;
    for (int k = 0; k < F; k += 2) {
      if (norm[k] > 0.0) gamma = std::max(gamma, sup[k] / norm[k]);
    }
    bool ok = gamma > 0.0;
    std::vector<double> ratios(F, 0.0);
    for (int k = 0; k < F; ++k) {
      if (norm[k] == 0.0) {
        if (sup[k] > 0.0) ok = false;
        continue;
      }
      ratios[k] = sup[k] / (gamma * norm[k]);
      if (k % 2 == 1 && ratios[k] > 2.0) ok = false;
    }
    best = {order, gamma, ok, ratios};
    if (ok) break;
  }
  if (!best.valid) best.m = -1;
  return best;
}

}  // namespace shelab
