#include "shelab/harness.hpp"

#include <algorithm>
#include <cmath>

#include "shelab/parallel.hpp"
#include "shelab/solver.hpp"
#include "shelab/weak_form.hpp"
#include "shelab/white_noise.hpp"

namespace shelab {

Grid1D resolution_grid(const ExperimentConfig& cfg, int r) { return Grid1D(cfg.setup, cfg.n_space << r); }
TimeGrid resolution_tgrid(const ExperimentConfig& cfg, int r) { return TimeGrid(cfg.horizon, cfg.n_time << r); }

RefinementSeries make_series(std::string name, std::vector<EnsembleStat> stats) {
  RefinementSeries s;
  s.name = std::move(name);
  s.per_resolution = std::move(stats);
  s.at_floor = std::all_of(s.per_resolution.begin(), s.per_resolution.end(),
                           [](const EnsembleStat& e) { return e.mean <= kResidualFloor; });
  s.pass = true;
  for (std::size_t r = 0; r + 1 < s.per_resolution.size(); ++r) {
    const double a = s.per_resolution[r].mean, b = s.per_resolution[r + 1].mean;
    const double ratio = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
    s.ratios.push_back(ratio);
    if (!(ratio >= kRefinementRatio) && !(a <= kResidualFloor && b <= kResidualFloor)) s.pass = false;
  }
  if (s.at_floor) s.pass = true;
  return s;
}

namespace {

// Sums and sums of squares of a fixed set of statistics.
struct StatSums {
  std::vector<double> sum, sum2;
  std::vector<int> count;
  int excluded = 0;

  explicit StatSums(std::size_t n = 0) : sum(n, 0.0), sum2(n, 0.0), count(n, 0) {}
  void add(std::size_t k, double v) {
    sum[k] += v;
    sum2[k] += v * v;
    ++count[k];
  }
  void merge(const StatSums& o) {
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k] += o.sum[k];
      sum2[k] += o.sum2[k];
      count[k] += o.count[k];
    }
    excluded += o.excluded;
  }
  EnsembleStat stat(std::size_t k) const {
    EnsembleStat e;
    e.count = count[k];
    if (e.count == 0) return e;
    e.mean = sum[k] / e.count;
    if (e.count > 1) {
      const double var = std::max(0.0, (sum2[k] - e.count * e.mean * e.mean) / (e.count - 1));
      e.stderr_mean = std::sqrt(var / e.count);
    }
    return e;
  }
};

std::vector<double> initial_field(const ExperimentConfig& cfg, const Grid1D& grid) {
  return constant_field(grid, cfg.u0);
}

// sup over the probe lattice of |a - b|
double sup_distance(const FieldRows& a, const FieldRows& b, int x_stride) {
  double d = 0.0;
  for (int m = 0; m < a.rows; ++m) {
    for (int i = 0; i < a.cols; i += x_stride) d = std::max(d, std::abs(a.at(m, i) - b.at(m, i)));
  }
  return d;
}

// sup over times and test functions of |∫_0^t ⟨φ, f(u_r) - g(u_r)⟩ dr| (left sums)
double paired_cauchy(const FieldPath& path, const DriftFn& f, const DriftFn& g,
                     const std::vector<std::vector<double>>& phis) {
  const int n = path.grid.n_nodes();
  const auto w = path.grid.weights();
  const double dt = path.tgrid.dt();
  std::vector<double> acc(phis.size(), 0.0), diff(n);
  double sup = 0.0;
  for (int m = 0; m < path.tgrid.n_time(); ++m) {
    const auto u = path.u.row(m);
    for (int i = 0; i < n; ++i) diff[i] = w[i] * (f(u[i]) - g(u[i]));
    for (std::size_t k = 0; k < phis.size(); ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += diff[i] * phis[k][i];
      acc[k] += dt * s;
      sup = std::max(sup, std::abs(acc[k]));
    }
  }
  return sup;
}

std::vector<TestFunction> weak_family(const ExperimentConfig& cfg, const Grid1D& coarsest) {
  auto fam = default_test_family(cfg.setup, false);
  std::vector<TestFunction> out;
  for (const auto& f : fam) {
    if (static_cast<int>(out.size()) >= cfg.weak_tests) break;
    // keep trig members resolvable on the coarsest grid
    if (f.family() != TestFamily::HermiteWholeLine && 2 * f.index() >= coarsest.n_space()) continue;
    out.push_back(f);
  }
  return out;
}

}  // namespace

EquivalenceTable equivalence_harness(const ExperimentConfig& cfg, int workers) {
  const int R = cfg.resolutions;
  const Grid1D fine_grid = resolution_grid(cfg, R - 1);
  const TimeGrid fine_tgrid = resolution_tgrid(cfg, R - 1);
  const auto family = weak_family(cfg, resolution_grid(cfg, 0));
  const auto& levels = cfg.mollification_levels;
  const std::size_t n_ladder = levels.size() - 1;
  // layout: [series * R + r] for the four series, then the two ladders
  const std::size_t n_stats = 4 * R + 2 * n_ladder;

  auto body = [&](StatSums& acc, int i) {
    const auto fine_noise = sample_noise(fine_grid, fine_tgrid, cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> vals(n_stats, 0.0);
    for (int r = 0; r < R; ++r) {
      const Grid1D grid = resolution_grid(cfg, r);
      const TimeGrid tg = resolution_tgrid(cfg, r);
      const auto noise = restrict_noise(fine_noise, grid, tg);
      const DriftFn drift = cfg.path_drift(grid, tg);
      const auto path = simulate_path({cfg.scheme, drift}, noise, initial_field(cfg, grid));
      if (path.aborted) {
        ++acc.excluded;
        return;
      }
      const auto mild = mild_residual_rows(path, drift);
      double mild_sup = 0.0;
      for (int m = 0; m < mild.rows; ++m) {
        for (int x = 0; x < mild.cols; x += cfg.probe_x_stride) mild_sup = std::max(mild_sup, std::abs(mild.at(m, x)));
      }
      double weak_sup = 0.0;
      for (const auto& phi : family) {
        for (double v : weak_residual_report(path, noise, drift, phi).residuals) weak_sup = std::max(weak_sup, std::abs(v));
      }
      const double n_r = grid_mollification_level(grid, tg);
      const MollifiedDrift lo(cfg.drift, n_r), hi(cfg.drift, 2.0 * n_r);
      const auto reg = regularized_mild_limit_check(cfg.drift, {n_r, 2.0 * n_r}, path, {cfg.probe_x_stride, 1});
      std::vector<std::vector<double>> phis;
      for (const auto& phi : family) phis.push_back(phi.sample(grid));
      vals[0 * R + r] = mild_sup;
      vals[1 * R + r] = weak_sup;
      vals[2 * R + r] = reg.differences[0];
      vals[3 * R + r] = paired_cauchy(path, lo.fn(), hi.fn(), phis);

      if (r == R - 1) {
        const auto ladder = regularized_mild_limit_check(cfg.drift, levels, path, {cfg.probe_x_stride, 1});
        for (std::size_t k = 0; k < n_ladder; ++k) {
          vals[4 * R + k] = ladder.differences[k];
          const MollifiedDrift a(cfg.drift, levels[k]), b(cfg.drift, levels[k + 1]);
          vals[4 * R + n_ladder + k] = paired_cauchy(path, a.fn(), b.fn(), phis);
        }
      }
    }
    for (std::size_t k = 0; k < n_stats; ++k) acc.add(k, vals[k]);
  };
  const auto sums = ordered_reduce<StatSums>(cfg.realizations, workers, [&] { return StatSums(n_stats); }, body);

  EquivalenceTable t;
  for (int r = 0; r < R; ++r) {
    t.n_space.push_back(cfg.n_space << r);
    t.n_time.push_back(cfg.n_time << r);
  }
  const char* names[4] = {"mild_residual", "weak_residual", "regularized_mild_cauchy", "regularized_weak_cauchy"};
  for (int s = 0; s < 4; ++s) {
    std::vector<EnsembleStat> st;
    for (int r = 0; r < R; ++r) st.push_back(sums.stat(s * R + r));
    t.series.push_back(make_series(names[s], st));
  }
  std::vector<EnsembleStat> lm, lw;
  for (std::size_t k = 0; k < n_ladder; ++k) {
    lm.push_back(sums.stat(4 * R + k));
    lw.push_back(sums.stat(4 * R + n_ladder + k));
  }
  t.ladder_levels = levels;
  t.ladder_mild = make_series("ladder_mild_cauchy", lm);
  t.ladder_weak = make_series("ladder_weak_cauchy", lw);
  auto monotone = [](const RefinementSeries& s) {
    if (s.at_floor) return true;
    for (std::size_t k = 1; k < s.per_resolution.size(); ++k) {
      if (s.per_resolution[k].mean > s.per_resolution[k - 1].mean) return false;
    }
    return true;
  };
  t.ladder_monotone = monotone(t.ladder_mild) && monotone(t.ladder_weak);
  t.excluded = sums.excluded;
  t.pass = t.excluded < cfg.realizations && t.ladder_monotone;
  for (const auto& s : t.series) t.pass = t.pass && s.pass;
  return t;
}

UniquenessTable uniqueness_coupling(const ExperimentConfig& cfg, int workers) {
  const int R = cfg.resolutions;
  const Grid1D fine_grid = resolution_grid(cfg, R - 1);
  const TimeGrid fine_tgrid = resolution_tgrid(cfg, R - 1);
  const bool ladder = cfg.uniqueness_mode == "ladder";

  auto body = [&](StatSums& acc, int i) {
    const auto fine_noise = sample_noise(fine_grid, fine_tgrid, cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> vals(R);
    for (int r = 0; r < R; ++r) {
      const Grid1D grid = resolution_grid(cfg, r);
      const TimeGrid tg = resolution_tgrid(cfg, r);
      const auto noise = restrict_noise(fine_noise, grid, tg);
      const auto u0 = initial_field(cfg, grid);
      const double n_r = cfg.path_level(grid, tg);
      const DriftFn drift = cfg.path_drift(grid, tg);
      const FieldPath a = simulate_path({cfg.scheme, ladder ? MollifiedDrift(cfg.drift, n_r).fn() : drift}, noise, u0);
      const FieldPath b = ladder ? simulate_path({cfg.scheme, MollifiedDrift(cfg.drift, 2.0 * n_r).fn()}, noise, u0)
                                 : simulate_path({cfg.compare_scheme, drift}, noise, u0);
      if (a.aborted || b.aborted) {
        ++acc.excluded;
        return;
      }
      vals[r] = sup_distance(a.u, b.u, cfg.probe_x_stride);
    }
    for (int r = 0; r < R; ++r) acc.add(r, vals[r]);
  };
  const auto sums = ordered_reduce<StatSums>(cfg.realizations, workers, [&] { return StatSums(R); }, body);

  UniquenessTable t;
  t.mode = cfg.uniqueness_mode;
  for (int r = 0; r < R; ++r) {
    t.n_space.push_back(cfg.n_space << r);
    t.n_time.push_back(cfg.n_time << r);
  }
  std::vector<EnsembleStat> st;
  for (int r = 0; r < R; ++r) st.push_back(sums.stat(r));
  t.distance = make_series("coupling_distance", st);
  t.pass = sums.excluded < cfg.realizations && t.distance.pass;
  return t;
}

}  // namespace shelab
