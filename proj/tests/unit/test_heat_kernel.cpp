#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shelab/heat_kernel.hpp"
#include "shelab/spectral.hpp"

using namespace shelab;

namespace {

// reference values: tests/oracles/kernel_oracles.py
constexpr double kG10 = 0.39894228040143268;
constexpr double kPeriodic100 = 1.00000000535057598;
constexpr double kPeriodic005 = 0.29289965184224092;  // t = 0.05, |x - y| = 0.5
constexpr double kNeumann0100 = 2.5231325324212875;
constexpr double kNeumann02 = 0.74589961518505723;    // t = 0.2, x = 0.3, y = 0.7
constexpr double kSineFactor01 = 0.13891113314280024;

std::vector<double> random_field(const Grid1D& g, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> f(g.n_nodes());
  for (auto& v : f) v = nd(gen);
  return f;
}

double dot(const Grid1D& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i) s += g.weights()[i] * a[i] * b[i];
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<Grid1D> all_grids() {
  return {Grid1D(DomainSetup::periodic(), 64), Grid1D(DomainSetup::neumann(), 64),
          Grid1D(DomainSetup::whole_line(8.0), 256)};
}

}  // namespace

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(1.0, 0.0) == doctest::Approx(kG10).epsilon(1e-15));
  CHECK(gaussian_kernel(1.0, 1.0) == gaussian_kernel(1.0, -1.0));
  auto f = [](double x) { return gaussian_kernel(1.0, x); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -8.0, 8.0, 15, 1e-14);
  CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("periodic kernel") {
  CHECK(std::abs(periodic_kernel(1.0, 0.0, 0.0) - kPeriodic100) < 1e-15);
  CHECK(std::abs(periodic_kernel(0.05, 0.3, 0.8) - kPeriodic005) < 1e-14);
  CHECK(std::abs(periodic_kernel(50.0, 0.1, 0.77) - 1.0) < 1e-12);
  auto row = [](double y) { return periodic_kernel(0.01, 0.3, y); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(row, 0.0, 1.0, 15, 1e-13);
  CHECK(std::abs(mass - 1.0) < 1e-10);
}

TEST_CASE("neumann kernel") {
  CHECK(std::abs(neumann_kernel(0.1, 0.0, 0.0) - kNeumann0100) < 1e-13);
  // boundary doubling: the reflected image coincides with the direct one at x = y = 0
  CHECK(neumann_kernel(0.1, 0.0, 0.0) == doctest::Approx(2.0 * periodized_gaussian(0.1, 0.0, 2.0)).epsilon(1e-14));
  CHECK(std::abs(neumann_kernel(0.2, 0.3, 0.7) - kNeumann02) < 1e-14);
  CHECK(neumann_kernel(0.2, 0.3, 0.7) == neumann_kernel(0.2, 0.7, 0.3));
  auto row = [](double y) { return neumann_kernel(0.05, 1.0, y); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(row, 0.0, 1.0, 15, 1e-13);
  CHECK(std::abs(mass - 1.0) < 1e-10);
}

TEST_CASE("kernel symmetry and positivity") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double t = 1e-3 + u(gen), x = u(gen), y = u(gen);
    CHECK(periodic_kernel(t, x, y) == doctest::Approx(periodic_kernel(t, y, x)).epsilon(1e-14));
    CHECK(neumann_kernel(t, x, y) == doctest::Approx(neumann_kernel(t, y, x)).epsilon(1e-14));
    CHECK(periodic_kernel(t, x, y) >= 0.0);
    CHECK(neumann_kernel(t, x, y) >= 0.0);
  }
}

TEST_CASE("semigroup preserves constants") {
  for (const auto& g : all_grids()) {
    for (auto rep : {Representation::Spectral, Representation::KernelMatrix}) {
      const std::vector<double> f(g.n_nodes(), 7.0);
      const auto p = apply_semigroup({g, 0.3, rep}, f);
      CHECK(max_diff(p, f) < 1e-10);
    }
  }
}

TEST_CASE("sine is an eigenfunction") {
  const Grid1D g(DomainSetup::periodic(), 128);
  std::vector<double> f(g.n_nodes());
  for (int i = 0; i < g.n_nodes(); ++i) f[i] = std::sin(2 * std::numbers::pi * g.node(i));
  const auto p = apply_semigroup({g, 0.1, Representation::Spectral}, f);
  for (int i = 0; i < g.n_nodes(); ++i) CHECK(std::abs(p[i] - kSineFactor01 * f[i]) < 1e-12);
}

TEST_CASE("spectral and kernel-matrix representations agree") {
  for (const auto& g : all_grids()) {
    const auto f = random_field(g, 5);
    const auto a = apply_semigroup({g, 0.05, Representation::Spectral}, f);
    const auto b = apply_semigroup({g, 0.05, Representation::KernelMatrix}, f);
    CHECK(max_diff(a, b) < 1e-10);
  }
}

TEST_CASE("Chapman-Kolmogorov") {
  for (const auto& g : all_grids()) {
    const auto f = random_field(g, 9);
    for (auto rep : {Representation::Spectral, Representation::KernelMatrix}) {
      const auto two = apply_semigroup({g, 0.07, rep}, apply_semigroup({g, 0.03, rep}, f));
      const auto one = apply_semigroup({g, 0.1, rep}, f);
      CHECK(max_diff(one, two) < 1e-9);
    }
  }
}

TEST_CASE("self-adjointness") {
  for (const auto& g : all_grids()) {
    const auto f = random_field(g, 1), h = random_field(g, 2);
    for (auto rep : {Representation::Spectral, Representation::KernelMatrix}) {
      const double a = dot(g, apply_semigroup({g, 0.04, rep}, f), h);
      const double b = dot(g, f, apply_semigroup({g, 0.04, rep}, h));
      CHECK(std::abs(a - b) < 1e-10);
    }
  }
}

TEST_CASE("positivity of the semigroup") {
  for (const auto& g : all_grids()) {
    auto f = random_field(g, 4);
    for (auto& v : f) v = std::abs(v);
    for (auto rep : {Representation::Spectral, Representation::KernelMatrix}) {
      const auto p = apply_semigroup({g, 0.02, rep}, f);
      CHECK(*std::min_element(p.begin(), p.end()) >= -1e-12);
    }
  }
}

TEST_CASE("mass conservation on the grid") {
  for (const auto& g : all_grids()) {
    const auto f = random_field(g, 8);
    const std::vector<double> one(g.n_nodes(), 1.0);
    const auto p = apply_semigroup({g, 0.2, Representation::Spectral}, f);
    CHECK(std::abs(dot(g, p, one) - dot(g, f, one)) < 1e-11);
  }
}

TEST_CASE("kernel cell masses sum to one") {
  for (const auto& g : all_grids()) {
    const double L = g.setup().extent(), a0 = g.setup().left();
    double s = 0.0;
    const int cells = 200;
    for (int c = 0; c < cells; ++c) s += kernel_cell_mass(g, 0.01, g.node(g.n_nodes() / 3), a0 + L * c / cells, a0 + L * (c + 1) / cells);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("image truncation") {
  const KernelEval small(1e-4, 1.0);
  const KernelEval large(2.0, 1.0);
  CHECK(small.n_images >= 1);
  CHECK(large.n_images > small.n_images);
  CHECK(std::abs(periodized_gaussian(1e-4, 0.4, 1.0)) < 1e-100);
}

TEST_CASE("spectral basis round trip") {
  for (const auto& g : all_grids()) {
    const SpectralBasis b(g);
    const auto f = random_field(g, 12);
    CHECK(max_diff(b.inverse(b.forward(f)), f) < 1e-13);
  }
}

TEST_CASE("shape mismatch is rejected") {
  const Grid1D g(DomainSetup::periodic(), 16);
  const std::vector<double> f(15, 1.0);
  CHECK_THROWS_AS(apply_semigroup({g, 0.1, Representation::Spectral}, f), ShapeError);
}
