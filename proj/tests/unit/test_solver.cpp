#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shelab/heat_kernel.hpp"
#include "shelab/solver.hpp"
#include "shelab/white_noise.hpp"

using namespace shelab;

namespace {

const DriftFn kSine = [](double u) { return std::sin(u); };

double sup_abs(const FieldRows& f) {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

std::vector<Grid1D> all_grids(int n) {
  return {Grid1D(DomainSetup::periodic(), n), Grid1D(DomainSetup::neumann(), n),
          Grid1D(DomainSetup::whole_line(8.0), 8 * n)};
}

}  // namespace

TEST_CASE("constant initial data without drift or noise stays put") {
  for (auto kind : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) {
    for (const auto& g : all_grids(16)) {
      const TimeGrid tg(1.0, 32);
      const auto p = simulate_path({kind, [](double) { return 0.0; }}, NoiseRealization::zero(g, tg),
                                   constant_field(g, 3.0));
      for (double v : p.u.data) CHECK(std::abs(v - 3.0) < 1e-13);
    }
  }
}

TEST_CASE("constant drift gives u_t = c t") {
  for (auto kind : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) {
    for (const auto& g : all_grids(16)) {
      const TimeGrid tg(1.0, 64);
      const auto p = simulate_path({kind, [](double) { return 0.7; }}, NoiseRealization::zero(g, tg),
                                   constant_field(g, 0.0));
      for (int m = 0; m <= tg.n_time(); ++m) {
        for (double v : p.u.row(m)) CHECK(std::abs(v - 0.7 * tg.time(m)) < 1e-12);
      }
    }
  }
}

TEST_CASE("linear drift reduces to the scalar ODE at first order") {
  const Grid1D g(DomainSetup::periodic(), 8);
  const double lambda = 0.8, c = 1.3;
  for (auto kind : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) {
    double prev = -1.0;
    for (int n : {32, 64, 128, 256}) {
      const TimeGrid tg(1.0, n);
      const auto p = simulate_path({kind, [&](double u) { return lambda * u; }}, NoiseRealization::zero(g, tg),
                                   constant_field(g, c));
      const double err = std::abs(p.u.at(n, 3) - c * std::exp(lambda));
      if (prev > 0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
      prev = err;
    }
  }
}

TEST_CASE("drift integral of constants") {
  const Grid1D g(DomainSetup::neumann(), 16);
  const TimeGrid tg(1.0, 32);
  const auto p = simulate_path({SchemeKind::SplittingExact, kSine}, sample_noise(g, tg, 1, 0), constant_field(g, 0.0));
  const auto one = drift_integral_K(p, [](double) { return 1.0; }, 0.25, 0.75, 5);
  CHECK(std::abs(one.value - 0.5) < 1e-14);
  CHECK_FALSE(one.diverged);
  CHECK(drift_integral_K(p, [](double) { return 0.0; }, 0.0, 1.0, 3).value == 0.0);
}

TEST_CASE("drift integral reproduces the scheme's K under refinement") {
  for (auto setup : {DomainSetup::periodic(), DomainSetup::neumann(), DomainSetup::whole_line(8.0)}) {
    const int n0 = setup.kind == DomainKind::WholeLine ? 256 : 32;
    const auto fine = sample_noise(Grid1D(setup, 4 * n0), TimeGrid(1.0, 512), 2, 0);
    double prev = -1.0;
    for (int r = 0; r < 3; ++r) {
      const Grid1D g(setup, n0 << r);
      const TimeGrid tg(1.0, 128 << r);
      const auto p = simulate_path({SchemeKind::SplittingExact, kSine}, restrict_noise(fine, g, tg), constant_field(g, 0.2));
      const auto q = drift_integral_rows(p, kSine);
      double err = 0.0;
      for (std::size_t k = 0; k < q.data.size(); ++k) err = std::max(err, std::abs(q.data[k] - p.K.data[k]));
      CHECK(err < 5e-3);
      if (prev > 0) CHECK(prev / err >= 1.3);
      prev = err;
    }
  }
}

TEST_CASE("mild residual vanishes for zero and constant drift") {
  for (const auto& g : all_grids(16)) {
    const TimeGrid tg(1.0, 64);
    const auto z = sample_noise(g, tg, 3, 0);
    for (double c : {0.0, 1.7}) {
      const DriftFn b = [c](double) { return c; };
      const auto p = simulate_path({SchemeKind::SplittingExact, b}, z, constant_field(g, 0.5));
      CHECK(sup_abs(mild_residual_rows(p, b)) < 1e-12);
    }
  }
}

TEST_CASE("mild residual shrinks under joint refinement") {
  const Grid1D fine_g(DomainSetup::periodic(), 256);
  const TimeGrid fine_t(1.0, 1024);
  const auto fine = sample_noise(fine_g, fine_t, 4, 0);
  double prev = -1.0;
  for (int r = 0; r < 3; ++r) {
    const Grid1D g(DomainSetup::periodic(), 64 << r);
    const TimeGrid tg(1.0, 256 << r);
    const auto p = simulate_path({SchemeKind::SplittingExact, kSine}, restrict_noise(fine, g, tg), constant_field(g, 0.0));
    const double res = std::abs(mild_residual(p, kSine, 1.0, g.n_nodes() / 2));
    if (prev > 0) CHECK(prev / res >= 1.3);
    prev = res;
  }
}

TEST_CASE("decomposition invariant") {
  for (auto kind : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) {
    for (const auto& g : all_grids(32)) {
      const TimeGrid tg(1.0, 64);
      const auto p = simulate_path({kind, kSine}, sample_noise(g, tg, 5, 0), constant_field(g, 0.3));
      for (auto [ms, mt] : {std::pair{8, 24}, std::pair{0, 64}, std::pair{33, 34}}) {
        const double h = tg.time(mt) - tg.time(ms);
        std::vector<double> a(g.n_nodes()), k(g.n_nodes());
        for (int i = 0; i < g.n_nodes(); ++i) {
          a[i] = p.u.at(ms, i) - p.V.values.at(ms, i);
          k[i] = p.K.at(ms, i);
        }
        const auto pa = apply_semigroup({g, h, Representation::Spectral}, a);
        const auto pk = apply_semigroup({g, h, Representation::Spectral}, k);
        const auto pu0 = p.pu0.row(mt);
        double err = 0.0;
        for (int i = 0; i < g.n_nodes(); ++i) {
          const double lhs = p.u.at(mt, i) - p.V.values.at(mt, i) - pa[i];
          const double rhs = p.K.at(mt, i) - pk[i];
          err = std::max(err, std::abs(lhs - rhs));
          // u = P_t u0 + K + V on the grid
          CHECK(std::abs(p.u.at(mt, i) - pu0[i] - p.K.at(mt, i) - p.V.values.at(mt, i)) < 1e-12);
        }
        CHECK(err < 1e-10);
      }
    }
  }
}

TEST_CASE("comparison principle for the splitting scheme") {
  const Grid1D g(DomainSetup::periodic(), 32);
  const TimeGrid tg(1.0, 128);
  const auto z = sample_noise(g, tg, 6, 0);
  const DriftFn lo = [](double u) { return std::sin(u) - 0.5; };
  const DriftFn hi = [](double u) { return std::sin(u) + 0.2 * std::cos(3 * u) + 0.3; };
  const auto a = simulate_path({SchemeKind::SplittingExact, lo}, z, constant_field(g, 0.0));
  const auto b = simulate_path({SchemeKind::SplittingExact, hi}, z, constant_field(g, 0.0));
  for (std::size_t k = 0; k < a.u.data.size(); ++k) CHECK(a.u.data[k] <= b.u.data[k] + 1e-12);
}

TEST_CASE("non-finite drift aborts the path") {
  const Grid1D g(DomainSetup::periodic(), 16);
  const TimeGrid tg(1.0, 16);
  const auto p = simulate_path({SchemeKind::SplittingExact, [](double u) { return u > 0.1 ? NAN : 0.0; }},
                               sample_noise(g, tg, 7, 0), constant_field(g, 0.0));
  CHECK(p.aborted);
  CHECK_FALSE(p.flag.empty());
}

TEST_CASE("regularized limits") {
  const Grid1D g(DomainSetup::periodic(), 64);
  const TimeGrid tg(1.0, 256);
  const auto z = sample_noise(g, tg, 8, 0);
  const std::vector<double> levels{8, 16, 32, 64};

  const auto smooth = DriftSpec::sine(1.0, 1.0);
  const auto ps = simulate_path({SchemeKind::SplittingExact, MollifiedDrift(smooth, 256.0).fn()}, z, constant_field(g, 0.0));
  const auto rs = regularized_mild_limit_check(smooth, levels, ps);
  for (double d : rs.differences) CHECK(d < 2e-2);
  CHECK(rs.monotone);

  for (const auto& spec : {DriftSpec::power(0.5, 1.0), DriftSpec::delta()}) {
    const auto p = simulate_path({SchemeKind::SplittingExact, MollifiedDrift(spec, 256.0).fn()}, z, constant_field(g, 0.0));
    const auto r = regularized_mild_limit_check(spec, levels, p);
    CHECK(r.monotone);
    for (std::size_t k = 1; k < r.differences.size(); ++k) CHECK(r.differences[k] < r.differences[k - 1]);
  }
}

TEST_CASE("grid mollification level") {
  CHECK(grid_mollification_level(Grid1D(DomainSetup::periodic(), 64), TimeGrid(1.0, 256)) == 256.0);
  CHECK(grid_mollification_level(Grid1D(DomainSetup::periodic(), 16), TimeGrid(1.0, 1024)) == 256.0);
}

TEST_CASE("scheme names round trip") {
  for (auto k : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) CHECK(scheme_kind_from_string(to_string(k)) == k);
}
