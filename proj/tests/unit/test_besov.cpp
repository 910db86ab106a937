#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shelab/besov.hpp"

using namespace shelab;

namespace {

double sine_k(double x, double k) { return std::sin(2 * std::numbers::pi * k * x); }

}  // namespace

TEST_CASE("zero has zero norm") {
  const auto e = estimate_besov_norm([](double) { return 0.0; }, -1.0, INFINITY);
  CHECK(e.value == 0.0);
}

TEST_CASE("a single mode activates one block") {
  // sin(3πx) on [-8, 8): discrete frequency 24, block j = 5 (16 <= 24 < 32)
  const auto e = estimate_besov_norm([](double x) { return sine_k(x, 1.5); }, -1.0, INFINITY);
  CHECK(e.value == doctest::Approx(std::pow(2.0, -5.0)).epsilon(0.05));
  const auto e2 = estimate_besov_norm([](double x) { return sine_k(x, 1.5); }, -0.5, INFINITY);
  CHECK(e2.value == doctest::Approx(std::pow(2.0, -2.5)).epsilon(0.05));
}

TEST_CASE("estimate is monotone in beta") {
  const auto e = estimate_besov_norm([](double x) { return x > 0 ? 1.0 : 0.0; }, -1.0, INFINITY);
  double prev = 0.0;
  for (double beta : {-2.0, -1.5, -1.0, -0.5, -0.25, 0.0}) {
    const double v = e.value_at(beta);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("mollification does not increase the estimate") {
  for (const auto& spec : {DriftSpec::sign(), DriftSpec::indicator(0.0, 1.0), DriftSpec::sine(1.0, 5.0),
                           DriftSpec::power(0.5, 1.0)}) {
    const auto raw = spec.form == DriftForm::PowerSingularity
                         ? estimate_besov_norm(MollifiedDrift(spec, 4096.0).fn(), -0.6, INFINITY)
                         : estimate_besov_norm([&](double u) { return spec.evaluate(u); }, -0.6, INFINITY);
    for (double n : {4.0, 16.0, 64.0, 256.0}) {
      const auto m = estimate_besov_norm(MollifiedDrift(spec, n).fn(), -0.6, INFINITY);
      CHECK(m.value <= 1.05 * raw.value);
    }
  }
}

TEST_CASE("embedding surrogate L_p into C^{-1/p}") {
  const double c1 = besov_embedding_constant(1.0);
  // g_{0.01} has unit L_1 norm
  const auto g = estimate_besov_norm(MollifiedDrift(DriftSpec::delta(), 100.0).fn(), -1.0, INFINITY);
  CHECK(g.value <= c1 * 1.0);
  const auto ind = DriftSpec::indicator(-0.3, 0.4);
  for (double p : {1.0, 1.5, 2.0}) {
    const auto e = estimate_besov_norm([&](double u) { return ind.evaluate(u); }, -1.0 / p, INFINITY);
    CHECK(e.value <= besov_embedding_constant(p) * ind.lp_norm(p));
  }
  const auto pw = DriftSpec::power(0.5, 1.0);
  for (double p : {1.0, 1.5, 1.9}) {
    const auto e = estimate_besov_norm(MollifiedDrift(pw, 4096.0).fn(), -1.0 / p, INFINITY);
    CHECK(e.value <= besov_embedding_constant(p) * pw.lp_norm(p));
  }
}

TEST_CASE("fixed smooth sequence converges trivially") {
  const auto f = [](double x) { return std::sin(x); };
  std::vector<std::function<double(double)>> seq(4, f);
  const auto r = check_convergence_callables(seq, {8, 16, 32, 64}, -1.0);
  CHECK(r.bounded);
  CHECK(r.cauchy);
  for (const auto& d : r.cross_differences) {
    for (double v : d) CHECK(v == 0.0);
  }
}

TEST_CASE("delta mollifiers are bounded in C^{-1} and Cauchy below") {
  std::vector<MollifiedDrift> seq;
  for (double n : {8.0, 16.0, 32.0, 64.0, 128.0}) seq.emplace_back(DriftSpec::delta(), n);
  const auto r = check_c_beta_minus_convergence(seq, DriftSpec::delta(), -1.0);
  CHECK(r.bounded);
  CHECK(r.cauchy);
  CHECK(r.pass);
  // β' = -1.25: the differences go to zero along the ladder
  REQUIRE(r.probe_betas[1] == -1.25);
  const auto& d = r.cross_differences[1];
  CHECK(d.back() < 0.75 * d.front());
}

TEST_CASE("wrongly scaled mollifiers are unbounded") {
  std::vector<std::function<double(double)>> seq;
  const std::vector<double> levels{8, 16, 32, 64, 128};
  for (double n : levels) {
    const MollifiedDrift m(DriftSpec::delta(), n);
    seq.push_back([m, n](double u) { return n * m(u); });
  }
  const auto r = check_convergence_callables(seq, levels, -1.0);
  CHECK_FALSE(r.bounded);
  CHECK_FALSE(r.pass);
}
