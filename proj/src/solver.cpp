#include "shelab/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace shelab {

std::string to_string(SchemeKind kind) {
  return kind == SchemeKind::SplittingExact ? "splitting" : "semi_implicit";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  if (name == "splitting") return SchemeKind::SplittingExact;
  if (name == "semi_implicit") return SchemeKind::SemiImplicit;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

namespace {

// (1 - e^{-λ dt}) / λ, the exact slice integral of e^{-λ(t_{m+1} - r)}
double slice_weight(double lambda, double dt) {
  return lambda == 0.0 ? dt : -std::expm1(-lambda * dt) / lambda;
}

}  // namespace

Scheme::Scheme(SchemeSpec spec, const Grid1D& grid, const TimeGrid& tgrid)
    : spec_(std::move(spec)), grid_(grid), tgrid_(tgrid), basis_(grid) {
  if (!spec_.drift) throw std::invalid_argument("scheme needs a drift evaluation");
  const int n = basis_.size();
  const double dt = tgrid.dt();
  decay_ = basis_.heat_multiplier(dt);
  gain_.resize(n);
  resolvent_.resize(n);
  for (int j = 0; j < n; ++j) {
    gain_[j] = ou_noise_factor(basis_.lambda()[j], dt);
    resolvent_[j] = 1.0 / (1.0 + dt * basis_.discrete_lambda()[j]);
  }
}

SchemeState Scheme::initial(std::span<const double> u0) const {
  const int n = basis_.size();
  if (static_cast<int>(u0.size()) != n) throw ShapeError("initial condition does not match grid");
  SchemeState s;
  s.u.assign(u0.begin(), u0.end());
  s.u_hat = basis_.forward(u0);
  s.p_hat = s.u_hat;
  s.k_hat.assign(n, 0.0);
  s.v_hat.assign(n, 0.0);
  return s;
}

bool Scheme::step(SchemeState& s, std::span<const double> noise_nodes) const {
  const int n = basis_.size();
  const double dt = tgrid_.dt();
  const auto w = grid_.weights();
  std::vector<double> b(n), z(n), bh(n), zh(n);
  for (int i = 0; i < n; ++i) {
    b[i] = spec_.drift(s.u[i]);
    if (!std::isfinite(b[i])) return false;
    z[i] = noise_nodes[i] / w[i];
  }
  basis_.forward(b, bh);
  basis_.forward(z, zh);
  for (int j = 0; j < n; ++j) {
    const double noise = gain_[j] * zh[j];
    s.v_hat[j] = decay_[j] * s.v_hat[j] + noise;
    s.p_hat[j] = decay_[j] * s.p_hat[j];
    if (spec_.kind == SchemeKind::SplittingExact) {
      s.k_hat[j] = decay_[j] * (s.k_hat[j] + dt * bh[j]);
      s.u_hat[j] = decay_[j] * (s.u_hat[j] + dt * bh[j]) + noise;
    } else {
      s.k_hat[j] = resolvent_[j] * (s.k_hat[j] + dt * bh[j]);
      s.u_hat[j] = s.p_hat[j] + s.k_hat[j] + s.v_hat[j];
    }
  }
  basis_.inverse(s.u_hat, s.u);
  ++s.m;
  return true;
}

FieldPath simulate_path(const SchemeSpec& spec, const NoiseRealization& noise, std::span<const double> u0) {
  const Grid1D& grid = noise.grid();
  const TimeGrid& tg = noise.tgrid();
  const int n = grid.n_nodes();
  const int M = tg.n_time();
  const Scheme scheme(spec, grid, tg);
  FieldPath p{grid,
              tg,
              std::vector<double>(u0.begin(), u0.end()),
              FieldRows(M + 1, n),
              FieldRows(M + 1, n),
              FieldRows(M + 1, n),
              StochasticConvolution{grid, tg, FieldRows(M + 1, n), FieldRows(M + 1, n),
                                    convolution_variance_table(grid, tg)},
              false,
              {}};
  auto state = scheme.initial(u0);
  std::copy(u0.begin(), u0.end(), p.u.row(0).begin());
  std::copy(u0.begin(), u0.end(), p.pu0.row(0).begin());
  const auto& basis = scheme.basis();
  for (int m = 0; m < M; ++m) {
    if (!scheme.step(state, noise.node_row(m))) {
      p.aborted = true;
      p.flag = "non-finite drift value at step " + std::to_string(m);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (int r = m + 1; r <= M; ++r) {
        for (auto* f : {&p.u, &p.K, &p.pu0, &p.V.values}) {
          auto row = f->row(r);
          std::fill(row.begin(), row.end(), nan);
        }
      }
      break;
    }
    std::copy(state.u.begin(), state.u.end(), p.u.row(m + 1).begin());
    basis.inverse(state.k_hat, p.K.row(m + 1));
    basis.inverse(state.p_hat, p.pu0.row(m + 1));
    std::copy(state.v_hat.begin(), state.v_hat.end(), p.V.coef.row(m + 1).begin());
    basis.inverse(state.v_hat, p.V.values.row(m + 1));
  }
  return p;
}

FieldRows drift_integral_rows(const FieldPath& path, const DriftFn& drift, int s_index) {
  const int n = path.grid.n_nodes();
  const int M = path.tgrid.n_time();
  if (s_index < 0 || s_index > M) throw std::domain_error("drift integral: s outside the time grid");
  const SpectralBasis basis(path.grid);
  const double dt = path.tgrid.dt();
  const auto decay = basis.heat_multiplier(dt);
  std::vector<double> phi(n);
  for (int j = 0; j < n; ++j) phi[j] = slice_weight(basis.lambda()[j], dt);
  FieldRows q(M + 1, n);
  std::vector<double> qh(n, 0.0), b(n), bh(n);
  for (int m = s_index; m < M; ++m) {
    const auto u = path.u.row(m);
    for (int i = 0; i < n; ++i) b[i] = drift(u[i]);
    basis.forward(b, bh);
    for (int j = 0; j < n; ++j) qh[j] = decay[j] * qh[j] + phi[j] * bh[j];
    basis.inverse(qh, q.row(m + 1));
  }
  return q;
}

std::vector<double> drift_integral_field(const FieldPath& path, const DriftFn& drift, int s_index, int t_index) {
  if (s_index > t_index) throw std::domain_error("drift integral needs s <= t");
  const auto rows = drift_integral_rows(path, drift, s_index);
  const auto r = rows.row(t_index);
  return {r.begin(), r.end()};
}

DriftIntegral drift_integral_K(const FieldPath& path, const DriftFn& drift, double s, double t, int x_index) {
  if (s > t) throw std::domain_error("drift integral needs s <= t");
  const int ms = path.tgrid.index_of(s);
  const int mt = path.tgrid.index_of(t);
  const int n = path.grid.n_nodes();
  const SpectralBasis basis(path.grid);
  const double dt = path.tgrid.dt();
  const auto decay = basis.heat_multiplier(dt);
  std::vector<double> qh(n, 0.0), b(n), bh(n), q(n);
  bool diverged = false;
  for (int m = ms; m < mt; ++m) {
    const auto u = path.u.row(m);
    for (int i = 0; i < n; ++i) b[i] = drift(u[i]);
    basis.forward(b, bh);
    for (int j = 0; j < n; ++j) qh[j] = decay[j] * qh[j] + slice_weight(basis.lambda()[j], dt) * bh[j];
    basis.inverse(qh, q);
    if (!(std::abs(q[x_index]) <= kDivergenceSentinel)) {
      diverged = true;
      break;
    }
  }
  if (ms == mt) return {0.0, false};
  return {diverged ? std::numeric_limits<double>::infinity() : q[x_index], diverged};
}

FieldRows mild_residual_rows(const FieldPath& path, const DriftFn& drift) {
  const auto q = drift_integral_rows(path, drift, 0);
  FieldRows r(q.rows, q.cols);
  for (std::size_t k = 0; k < r.data.size(); ++k) {
    r.data[k] = path.u.data[k] - path.pu0.data[k] - q.data[k] - path.V.values.data[k];
  }
  return r;
}

double mild_residual(const FieldPath& path, const DriftFn& drift, double t, int x_index) {
  const int m = path.tgrid.index_of(t);
  const auto q = drift_integral_rows(path, drift, 0);
  return path.u.at(m, x_index) - path.pu0.at(m, x_index) - q.at(m, x_index) - path.V.values.at(m, x_index);
}

std::vector<double> random_control(const FieldPath& path, const DriftFn& drift, int s_index, int t_index) {
  DriftFn absd = [&drift](double u) { return std::abs(drift(u)); };
  return drift_integral_field(path, absd, s_index, t_index);
}

CauchyReport regularized_mild_limit_check(const DriftSpec& base, const std::vector<double>& levels,
                                          const FieldPath& path, const ProbeLattice& probe) {
  if (levels.size() < 2) throw std::invalid_argument("need at least two mollification levels");
  CauchyReport rep;
  rep.levels = levels;
  rep.probe = probe;
  std::vector<FieldRows> ks;
  for (double n : levels) ks.push_back(drift_integral_rows(path, MollifiedDrift(base, n).fn(), 0));
  for (std::size_t l = 0; l + 1 < ks.size(); ++l) {
    double sup = 0.0;
    for (int m = 0; m < ks[l].rows; m += probe.t_stride) {
      for (int i = 0; i < ks[l].cols; i += probe.x_stride) {
        sup = std::max(sup, std::abs(ks[l].at(m, i) - ks[l + 1].at(m, i)));
      }
    }
    rep.differences.push_back(sup);
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.differences.size(); ++k) {
    if (rep.differences[k] > rep.differences[k - 1]) rep.monotone = false;
  }
  return rep;
}

double grid_mollification_level(const Grid1D& grid, const TimeGrid& tgrid) {
  return 1.0 / std::max(tgrid.dt(), grid.dx() * grid.dx());
}

std::vector<double> constant_field(const Grid1D& grid, double value) {
  return std::vector<double>(grid.n_nodes(), value);
}

}  // namespace shelab
