#include "shelab/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "shelab/spectral.hpp"

namespace shelab {

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& samples) {
  ExponentFit fit;
  std::vector<double> x, y;
  for (const auto& [scale, value] : samples) {
    if (!(scale > 0.0)) throw std::invalid_argument("fit_exponent: scales must be positive");
    if (!(value > 0.0) || !std::isfinite(value)) {
      ++fit.dropped;
      continue;
    }
    x.push_back(std::log(scale));
    y.push_back(std::log(value));
  }
  const int n = static_cast<int>(x.size());
  fit.n_points = n;
  fit.underpowered = n < kMinFitPoints;
  if (n == 0) {
    fit.degenerate = true;
    return fit;
  }
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double rss = 0.0, meat = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.exponent * x[i];
    rss += e * e;
    meat += (x[i] - mx) * (x[i] - mx) * e * e;
  }
  fit.residual_rms = std::sqrt(rss / n);
  if (n > 2) {
    // HC1 sandwich variance of the slope
    fit.stderr_hc = std::sqrt(meat / (sxx * sxx) * n / (n - 2.0));
    const boost::math::students_t dist(n - 2.0);
    const double tq = boost::math::quantile(dist, 0.975);
    fit.half_width = std::max(tq * fit.stderr_hc, DBL_EPSILON);
  }
  return fit;
}

ExponentFit fit_exponent(const std::vector<double>& scales, const std::vector<double>& values) {
  if (scales.size() != values.size()) throw std::invalid_argument("fit_exponent: size mismatch");
  std::vector<std::pair<double, double>> s;
  for (std::size_t i = 0; i < scales.size(); ++i) s.emplace_back(scales[i], values[i]);
  return fit_exponent(s);
}

MomentAccumulator::MomentAccumulator(std::vector<int> lag_steps, int n_probes_per_lag, double moment)
    : lag_steps_(std::move(lag_steps)), probes_(n_probes_per_lag), moment_(moment) {
  if (!(moment >= 1.0)) throw std::invalid_argument("moment order must be >= 1");
  sum_.assign(lag_steps_.size() * static_cast<std::size_t>(probes_), 0.0);
  sum2_.assign(sum_.size(), 0.0);
}

void MomentAccumulator::add(int lag, int probe, double d) {
  const double a = moment_ == 2.0 ? d * d : std::pow(std::abs(d), moment_);
  const std::size_t k = static_cast<std::size_t>(lag) * probes_ + probe;
  sum_[k] += a;
  sum2_[k] += a * a;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (sum_.empty()) {
    *this = o;
    return;
  }
  if (o.sum_.size() != sum_.size()) throw std::invalid_argument("merging incompatible accumulators");
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    sum_[k] += o.sum_[k];
    sum2_[k] += o.sum2_[k];
  }
  realizations_ += o.realizations_;
}

std::vector<double> MomentAccumulator::max_norms(std::vector<double>* stderrs) const {
  const int L = static_cast<int>(lag_steps_.size());
  std::vector<double> out(L, 0.0);
  if (stderrs) stderrs->assign(L, 0.0);
  if (realizations_ == 0) return out;
  const double N = realizations_;
  for (int l = 0; l < L; ++l) {
    int arg = -1;
    double best = -1.0;
    for (int p = 0; p < probes_; ++p) {
      const double mu = sum_[static_cast<std::size_t>(l) * probes_ + p] / N;
      if (mu > best) {
        best = mu;
        arg = p;
      }
    }
    out[l] = std::pow(best, 1.0 / moment_);
    if (stderrs && arg >= 0 && best > 0.0) {
      const double m2 = sum2_[static_cast<std::size_t>(l) * probes_ + arg] / N;
      const double se_mu = std::sqrt(std::max(0.0, m2 - best * best) / N);
      (*stderrs)[l] = out[l] * se_mu / (moment_ * best);
    }
  }
  return out;
}

bool MomentAccumulator::all_zero() const {
  return std::all_of(sum_.begin(), sum_.end(), [](double v) { return v == 0.0; });
}

namespace {

int steps_for(const TimeGrid& tg, double h) {
  const double r = h / tg.dt();
  const long k = std::lround(r);
  if (k < 1 || std::abs(r - k) > 1e-9 * r) return -1;
  return static_cast<int>(k);
}

std::vector<int> kappa_lag_steps(const TimeGrid& tg, const KappaSetup& setup) {
  std::vector<int> steps;
  for (int k : setup.lag_exponents) {
    const int s = steps_for(tg, std::ldexp(1.0, -k));
    if (s > 0) steps.push_back(s);
  }
  return steps;
}

std::vector<int> s_probes(const TimeGrid& tg, double s_min, int stride, int max_lag) {
  std::vector<int> s;
  const int first = static_cast<int>(std::ceil(s_min / tg.dt() - 1e-9));
  for (int m = first; m + max_lag <= tg.n_time(); m += stride) s.push_back(m);
  return s;
}

std::vector<int> x_probes(const Grid1D& grid, int stride, int reach = 0) {
  std::vector<int> x;
  const bool wrap = grid.kind() == DomainKind::PeriodicUnit;
  for (int i = 0; i < grid.n_nodes(); i += stride) {
    if (grid.kind() == DomainKind::WholeLine && !grid.in_window(i)) continue;
    if (!wrap && i + reach >= grid.n_nodes()) continue;
    x.push_back(i);
  }
  return x;
}

}  // namespace

MomentAccumulator make_kappa_accumulator(const Grid1D& grid, const TimeGrid& tgrid, const KappaSetup& setup) {
  auto lags = kappa_lag_steps(tgrid, setup);
  const int max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
  const auto s = s_probes(tgrid, setup.probe.s_min, setup.probe.t_stride, max_lag);
  const auto x = x_probes(grid, setup.probe.x_stride);
  return MomentAccumulator(std::move(lags), static_cast<int>(s.size() * x.size()), setup.moment);
}

void accumulate_kappa(MomentAccumulator& acc, const FieldPath& path, const KappaSetup& setup) {
  const auto& lags = acc.lag_steps();
  const int max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
  const auto s = s_probes(path.tgrid, setup.probe.s_min, setup.probe.t_stride, max_lag);
  const auto x = x_probes(path.grid, setup.probe.x_stride);
  const SpectralBasis basis(path.grid);
  const int n = basis.size();
  const double dt = path.tgrid.dt();
  std::vector<std::vector<double>> decay;
  for (int l : lags) decay.push_back(basis.heat_multiplier(l * dt));
  std::vector<double> psi(n), coef(n), shifted(n), prop(n);
  for (std::size_t a = 0; a < s.size(); ++a) {
    const int m = s[a];
    for (int i = 0; i < n; ++i) psi[i] = path.u.at(m, i) - path.V.values.at(m, i);
    basis.forward(psi, coef);
    for (std::size_t l = 0; l < lags.size(); ++l) {
      for (int j = 0; j < n; ++j) shifted[j] = decay[l][j] * coef[j];
      basis.inverse(shifted, prop);
      const int mt = m + lags[l];
      for (std::size_t b = 0; b < x.size(); ++b) {
        const int i = x[b];
        const double d = path.u.at(mt, i) - path.V.values.at(mt, i) - prop[i];
        acc.add(static_cast<int>(l), static_cast<int>(a * x.size() + b), d);
      }
    }
  }
  acc.count_realization();
}

double kappa_theory(double p) {
  if (!(p >= 1.0)) throw std::domain_error("integrability p must be >= 1");
  return std::isinf(p) ? 1.0 : 1.0 - 1.0 / (4.0 * p);
}

KappaReport estimate_kappa(const MomentAccumulator& acc, const TimeGrid& tgrid, double p) {
  KappaReport r;
  r.p = p;
  r.kappa_theory = kappa_theory(p);
  r.moment = acc.moment();
  r.realizations = acc.realizations();
  for (int l : acc.lag_steps()) r.lags.push_back(l * tgrid.dt());
  r.norms = acc.max_norms(&r.norm_stderr);
  r.degenerate = acc.all_zero();
  if (!r.degenerate) {
    r.kappa_hat = fit_exponent(r.lags, r.norms);
    r.degenerate = r.kappa_hat.degenerate;
  } else {
    r.kappa_hat.degenerate = true;
    r.kappa_hat.n_points = static_cast<int>(r.lags.size());
  }
  r.underpowered = static_cast<int>(r.lags.size()) < kMinFitPoints || (!r.degenerate && r.kappa_hat.underpowered);
  return r;
}

KappaReport estimate_kappa(const std::vector<FieldPath>& ensemble, double p, const KappaSetup& setup) {
  if (ensemble.empty()) throw std::invalid_argument("estimate_kappa needs paths");
  auto acc = make_kappa_accumulator(ensemble[0].grid, ensemble[0].tgrid, setup);
  for (const auto& path : ensemble) accumulate_kappa(acc, path, setup);
  return estimate_kappa(acc, ensemble[0].tgrid, p);
}

SewingGerm::SewingGerm(const StochasticConvolution& v, DriftFn f, std::vector<double> psi, double T, int x_index)
    : v_(v), f_(std::move(f)), T_(T), x_index_(x_index) {
  const SpectralBasis basis(v.grid);
  if (static_cast<int>(psi.size()) != basis.size()) throw ShapeError("germ ψ does not match the grid");
  psi_hat_ = basis.forward(psi);
  if (T > v.tgrid.horizon() + 1e-12) throw std::domain_error("germ horizon beyond the path");
}

double SewingGerm::operator()(int s_index, int t_index) const {
  if (s_index > t_index) throw std::domain_error("germ needs s <= t");
  const SpectralBasis basis(v_.grid);
  const int n = basis.size();
  const double dt = v_.tgrid.dt();
  std::vector<double> acc(n, 0.0), shifted(n), field(n), g(n), gh(n);
  for (int m = s_index; m < t_index; ++m) {
    const double r = m * dt;
    const auto e = basis.heat_multiplier(r - s_index * dt);
    for (int j = 0; j < n; ++j) shifted[j] = e[j] * psi_hat_[j];
    basis.inverse(shifted, field);
    const auto vr = v_.values.row(m);
    for (int i = 0; i < n; ++i) g[i] = f_(vr[i] + field[i]);
    basis.forward(g, gh);
    const auto eT = basis.heat_multiplier(T_ - r);
    for (int j = 0; j < n; ++j) acc[j] += dt * eT[j] * gh[j];
  }
  basis.inverse(acc, field);
  return field[x_index_];
}

double SewingGerm::delta(int s, int u, int t) const { return (*this)(s, t) - (*this)(s, u) - (*this)(u, t); }

std::vector<double> default_germ_psi(const Grid1D& grid) {
  std::vector<double> psi(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double x = grid.node(i);
    switch (grid.kind()) {
      case DomainKind::PeriodicUnit: psi[i] = 0.5 * std::cos(2.0 * std::numbers::pi * x); break;
      case DomainKind::NeumannUnit: psi[i] = 0.5 * std::cos(std::numbers::pi * x); break;
      case DomainKind::WholeLine: psi[i] = 0.5 * std::exp(-0.5 * x * x); break;
    }
  }
  return psi;
}

MomentAccumulator make_sewing_accumulator(const SewingSetup& setup) {
  std::vector<int> idx(setup.lag_exponents.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
  return MomentAccumulator(idx, 1, setup.moment);
}

void accumulate_sewing(MomentAccumulator& a_acc, MomentAccumulator& delta_acc, const StochasticConvolution& v,
                       const DriftFn& f, const SewingSetup& setup) {
  const int x = setup.x_index >= 0 ? setup.x_index : v.grid.n_nodes() / 2;
  const SewingGerm germ(v, f, default_germ_psi(v.grid), setup.T, x);
  const int s = steps_for(v.tgrid, setup.s);
  if (s < 0 && setup.s != 0.0) throw std::domain_error("sewing s is not on the time grid");
  for (std::size_t k = 0; k < setup.lag_exponents.size(); ++k) {
    const int h = steps_for(v.tgrid, std::ldexp(1.0, -setup.lag_exponents[k]));
    if (h < 2 || h % 2 != 0) throw std::domain_error("sewing lag must be an even number of time steps");
    const int s0 = std::max(s, 0);
    if ((s0 + h) * v.tgrid.dt() > setup.T + 1e-12) throw std::domain_error("sewing lag runs past T");
    const double a = germ(s0, s0 + h);
    const double d = a - germ(s0, s0 + h / 2) - germ(s0 + h / 2, s0 + h);
    a_acc.add(static_cast<int>(k), 0, a);
    delta_acc.add(static_cast<int>(k), 0, d);
  }
  a_acc.count_realization();
  delta_acc.count_realization();
}

SewingRateReport sewing_rate_report(const MomentAccumulator& a_acc, const MomentAccumulator& delta_acc,
                                    const SewingSetup& setup, double gamma, std::string germ_tag) {
  SewingRateReport r;
  r.germ_tag = std::move(germ_tag);
  r.gamma_input = gamma;
  r.moment = a_acc.moment();
  r.realizations = a_acc.realizations();
  for (int k : setup.lag_exponents) r.lags.push_back(std::ldexp(1.0, -k));
  r.a_norms = a_acc.max_norms();
  r.delta_norms = delta_acc.max_norms();
  r.a_slope = fit_exponent(r.lags, r.a_norms);
  r.slope_threshold = 1.0 + gamma / 4.0 - 0.1;
  r.slope_ok = !r.a_slope.degenerate && r.a_slope.exponent >= r.slope_threshold;
  // roundoff of sums of order h counts as zero
  double max_d = 0.0, max_a = 0.0;
  for (double v : r.delta_norms) max_d = std::max(max_d, v);
  for (double v : r.a_norms) max_a = std::max(max_a, v);
  r.delta_identically_zero = max_d <= 64.0 * DBL_EPSILON * std::max(max_a, 1.0);
  if (r.delta_identically_zero) {
    r.alpha1_ok = true;
  } else {
    r.alpha1_hat = fit_exponent(r.lags, r.delta_norms);
    r.alpha1_ok = !r.alpha1_hat.degenerate && r.alpha1_hat.exponent > 0.5;
  }
  r.pass = r.slope_ok && r.alpha1_ok;
  return r;
}

RiemannLimitReport riemann_sum_limit_check(const std::function<double(double, double)>& germ, double t,
                                           const std::vector<int>& levels) {
  if (levels.empty()) throw std::invalid_argument("riemann_sum_limit_check needs levels");
  RiemannLimitReport r;
  r.levels = levels;
  for (int l : levels) {
    if (l < 0 || l > 12) throw std::domain_error("dyadic level outside [0, 12]");
    const int pieces = 1 << l;
    double s = 0.0;
    for (int i = 0; i < pieces; ++i) s += germ(t * i / pieces, t * (i + 1) / pieces);
    r.sums.push_back(s);
  }
  for (std::size_t k = 0; k + 1 < r.sums.size(); ++k) r.differences.push_back(std::abs(r.sums[k + 1] - r.sums[k]));
  r.cauchy = true;
  for (std::size_t k = 1; k < r.differences.size(); ++k) {
    if (r.differences[k] > r.differences[k - 1] && r.differences[k] > 1e-13) r.cauchy = false;
  }
  r.limit = r.sums.back();
  const std::size_t d = r.differences.size();
  if (d >= 2 && r.differences[d - 2] > 0.0) {
    // geometric tail with the last observed contraction ratio
    const double q = r.differences[d - 1] / r.differences[d - 2];
    if (q < 1.0) r.limit += (r.sums[d] - r.sums[d - 1]) * q / (1.0 - q);
  }
  return r;
}

HolderAccumulators make_holder_accumulators(const Grid1D& grid, const TimeGrid& tgrid, const HolderSetup& setup) {
  const int max_t = *std::max_element(setup.time_steps.begin(), setup.time_steps.end());
  const int max_x = *std::max_element(setup.space_steps.begin(), setup.space_steps.end());
  const auto s = s_probes(tgrid, setup.probe.s_min, setup.probe.t_stride, max_t);
  const auto st = s_probes(tgrid, setup.probe.s_min, setup.probe.t_stride, 0);
  const auto x = x_probes(grid, setup.probe.x_stride);
  const auto xs = x_probes(grid, setup.probe.x_stride, max_x);
  return {MomentAccumulator(setup.time_steps, static_cast<int>(s.size() * x.size()), setup.moment),
          MomentAccumulator(setup.space_steps, static_cast<int>(st.size() * xs.size()), setup.moment)};
}

void accumulate_holder(HolderAccumulators& acc, const FieldRows& K, const Grid1D& grid, const TimeGrid& tgrid,
                       const HolderSetup& setup) {
  const int max_t = *std::max_element(setup.time_steps.begin(), setup.time_steps.end());
  const int max_x = *std::max_element(setup.space_steps.begin(), setup.space_steps.end());
  const auto s = s_probes(tgrid, setup.probe.s_min, setup.probe.t_stride, max_t);
  const auto st = s_probes(tgrid, setup.probe.s_min, setup.probe.t_stride, 0);
  const auto x = x_probes(grid, setup.probe.x_stride);
  const auto xs = x_probes(grid, setup.probe.x_stride, max_x);
  const int n = grid.n_nodes();
  for (std::size_t l = 0; l < setup.time_steps.size(); ++l) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < x.size(); ++b) {
        const double d = K.at(s[a] + setup.time_steps[l], x[b]) - K.at(s[a], x[b]);
        acc.time.add(static_cast<int>(l), static_cast<int>(a * x.size() + b), d);
      }
    }
  }
  for (std::size_t l = 0; l < setup.space_steps.size(); ++l) {
    for (std::size_t a = 0; a < st.size(); ++a) {
      for (std::size_t b = 0; b < xs.size(); ++b) {
        const int j = (xs[b] + setup.space_steps[l]) % n;
        const double d = K.at(st[a], j) - K.at(st[a], xs[b]);
        acc.space.add(static_cast<int>(l), static_cast<int>(a * xs.size() + b), d);
      }
    }
  }
  acc.time.count_realization();
  acc.space.count_realization();
}

HolderReport holder_field_regularity(const HolderAccumulators& acc, const Grid1D& grid, const TimeGrid& tgrid) {
  HolderReport r;
  r.time_norms = acc.time.max_norms();
  r.space_norms = acc.space.max_norms();
  std::vector<double> ht, hx;
  for (int k : acc.time.lag_steps()) ht.push_back(k * tgrid.dt());
  for (int k : acc.space.lag_steps()) hx.push_back(k * grid.dx());
  r.time = fit_exponent(ht, r.time_norms);
  r.space = fit_exponent(hx, r.space_norms);
  return r;
}

HolderReport holder_field_regularity(const std::vector<FieldRows>& K_ensemble, const Grid1D& grid,
                                     const TimeGrid& tgrid, const HolderSetup& setup) {
  auto acc = make_holder_accumulators(grid, tgrid, setup);
  for (const auto& K : K_ensemble) accumulate_holder(acc, K, grid, tgrid, setup);
  return holder_field_regularity(acc, grid, tgrid);
}

ControlCheck check_control(const FieldPath& path, const DriftFn& drift, int T_index, int time_stride, int x_stride,
                           double tol) {
  const int M = path.tgrid.n_time();
  if (T_index < 0 || T_index > M) throw std::out_of_range("control horizon outside the time grid");
  DriftFn absd = [&drift](double u) { return std::abs(drift(u)); };
  const SpectralBasis basis(path.grid);
  const int n = basis.size();
  const double dt = path.tgrid.dt();
  std::vector<int> times;
  for (int m = 0; m <= T_index; m += time_stride) times.push_back(m);
  if (times.back() != T_index) times.push_back(T_index);

  std::vector<FieldRows> w;  // w[a] holds rows m of w_{times[a], m}
  for (int s : times) w.push_back(drift_integral_rows(path, absd, s));

  auto propagate = [&](std::span<const double> f, double h) {
    auto c = basis.forward(f);
    const auto e = basis.heat_multiplier(h);
    for (int j = 0; j < n; ++j) c[j] *= e[j];
    return basis.inverse(c);
  };

  ControlCheck c;
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = a + 1; b < times.size(); ++b) {
      for (std::size_t e = b + 1; e < times.size(); ++e) {
        const int u = times[b], t = times[e];
        const auto lam_su = propagate(w[a].row(u), (T_index - u) * dt);
        const auto lam_ut = propagate(w[b].row(t), (T_index - t) * dt);
        const auto lam_st = propagate(w[a].row(t), (T_index - t) * dt);
        const auto pw = propagate(w[a].row(u), (t - u) * dt);
        for (int i = 0; i < n; i += x_stride) {
          c.worst_excess = std::max(c.worst_excess, lam_su[i] + lam_ut[i] - lam_st[i]);
          c.worst_additivity = std::max(c.worst_additivity, std::abs(pw[i] + w[b].at(t, i) - w[a].at(t, i)));
        }
        ++c.triples;
      }
    }
  }
  c.superadditive = c.worst_excess <= tol;
  c.additive = c.worst_additivity <= tol;
  return c;
}

QuantileEstimate empirical_quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const int n = static_cast<int>(x.size());
  auto at = [&](double pos) {
    pos = std::clamp(pos, 0.0, n - 1.0);
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, n - 1);
    return x[lo] + (pos - lo) * (x[hi] - x[lo]);
  };
  QuantileEstimate e;
  e.value = at(q * (n - 1));
  const double spread = std::sqrt(n * q * (1.0 - q));
  e.stderr_q = 0.5 * (at(q * (n - 1) + spread) - at(q * (n - 1) - spread));
  return e;
}

QuantileLadder quantile_ladder(const std::vector<std::vector<double>>& per_level, double q) {
  QuantileLadder l;
  for (const auto& s : per_level) l.quantiles.push_back(empirical_quantile(s, q));
  l.decreasing = true;
  for (std::size_t k = 1; k < l.quantiles.size(); ++k) {
    if (l.quantiles[k].value > l.quantiles[k - 1].value + l.quantiles[k - 1].stderr_q) l.decreasing = false;
  }
  return l;
}

}  // namespace shelab
