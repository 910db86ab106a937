// End-to-end acceptance: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shelab/besov.hpp"
#include "shelab/diagnostics.hpp"
#include "shelab/experiments.hpp"
#include "shelab/heat_kernel.hpp"
#include "shelab/solver.hpp"
#include "shelab/weak_form.hpp"
#include "shelab/white_noise.hpp"

using namespace shelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

ExperimentConfig config(const std::string& name) { return load_config(std::string(SHELAB_CONFIG_DIR) + "/" + name); }

const VerdictRow* find_row(const ExperimentResult& r, const std::string& statistic) {
  for (const auto& row : r.rows) {
    if (row.statistic == statistic) return &row;
  }
  return nullptr;
}

double row_value(const ExperimentResult& r, const std::string& statistic) {
  const auto* row = find_row(r, statistic);
  return row ? row->value : std::nan("");
}

std::vector<double> random_field(const Grid1D& g, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> f(g.n_nodes());
  for (auto& v : f) v = nd(gen);
  return f;
}

double weighted_dot(const Grid1D& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i) s += g.weights()[i] * a[i] * b[i];
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// sample variance of a zero-mean statistic with the standard error of that variance
struct VarianceEstimate {
  double n = 0, s1 = 0, s2 = 0, s4 = 0;
  void add(double x) {
    ++n;
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  double var() const { return (s2 - s1 * s1 / n) / (n - 1); }
  double se() const {
    const double m2 = s2 / n, m4 = s4 / n;
    return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  }
};

// 1. κ law for bounded and L_p drifts
void kappa_law(Outcome& o) {
  for (const char* name : {"kappa_sine.yaml", "kappa_power.yaml"}) {
    const auto cfg = config(name);
    const auto r = run_experiment(cfg, 8);
    const double hat = row_value(r, "m2.kappa_hat"), theory = row_value(r, "m2.kappa_theory");
    const double hw = row_value(r, "m2.half_width");
    o.detail << name << ": kappa_hat " << hat << " +- " << hw << " vs " << theory << "; ";
    o.require(cfg.realizations == 400 && cfg.n_space == 256 && cfg.n_time == 256, std::string(name) + " scale");
    o.require(std::abs(hat - theory) <= 0.12 && std::isfinite(hw), name);
  }
}

// 2. heat kernel identities on every domain and both representations
void kernel_suite(Outcome& o) {
  double worst_ck = 0, worst_mass = 0, worst_sym = 0, worst_adj = 0, worst_rep = 0;
  for (const auto& g : {Grid1D(DomainSetup::periodic(), 64), Grid1D(DomainSetup::neumann(), 64),
                        Grid1D(DomainSetup::whole_line(8.0), 256)}) {
    const auto f = random_field(g, 1), h = random_field(g, 2);
    const std::vector<double> one(g.n_nodes(), 1.0);
    for (auto rep : {Representation::Spectral, Representation::KernelMatrix}) {
      const auto two = apply_semigroup({g, 0.07, rep}, apply_semigroup({g, 0.03, rep}, f));
      worst_ck = std::max(worst_ck, max_diff(apply_semigroup({g, 0.1, rep}, f), two));
      const double a = weighted_dot(g, apply_semigroup({g, 0.04, rep}, f), h);
      const double b = weighted_dot(g, f, apply_semigroup({g, 0.04, rep}, h));
      worst_adj = std::max(worst_adj, std::abs(a - b));
    }
    const auto p = apply_semigroup({g, 0.2, Representation::Spectral}, f);
    worst_mass = std::max(worst_mass, std::abs(weighted_dot(g, p, one) - weighted_dot(g, f, one)));
    worst_rep = std::max(worst_rep, max_diff(apply_semigroup({g, 0.05, Representation::Spectral}, f),
                                             apply_semigroup({g, 0.05, Representation::KernelMatrix}, f)));
  }
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double t = 1e-3 + u(gen), x = u(gen), y = u(gen);
    worst_sym = std::max(worst_sym, std::abs(periodic_kernel(t, x, y) - periodic_kernel(t, y, x)));
    worst_sym = std::max(worst_sym, std::abs(neumann_kernel(t, x, y) - neumann_kernel(t, y, x)));
  }
  o.detail << "chapman-kolmogorov " << worst_ck << ", mass " << worst_mass << ", symmetry " << worst_sym
           << ", self-adjoint " << worst_adj << ", spectral-vs-image " << worst_rep;
  o.require(worst_ck < 1e-9, "chapman-kolmogorov");
  o.require(worst_mass < 1e-11, "mass");
  o.require(worst_sym < 1e-12, "symmetry");
  o.require(worst_adj < 1e-10, "self-adjointness");
  o.require(worst_rep < 1e-10, "spectral vs image");
}

// 3. law of the stochastic convolution at t = 1
void convolution_law(Outcome& o) {
  const double target_line = 1.0 / std::sqrt(std::numbers::pi);
  {
    const Grid1D g(DomainSetup::whole_line(8.0), 256);
    const TimeGrid tg(1.0, 4);
    const int mid = g.n_nodes() / 2;
    VarianceEstimate v;
    for (int r = 0; r < 2000; ++r) v.add(simulate_convolution(sample_noise(g, tg, 21, r)).values.at(tg.n_time(), mid));
    o.detail << "whole line " << v.var() << " vs " << target_line << " (se " << v.se() << "); ";
    o.require(std::abs(v.var() - target_line) < 3.0 * v.se(), "whole line");
  }
  {
    const Grid1D g(DomainSetup::periodic(), 64);
    const TimeGrid tg(1.0, 4);
    const double rho = convolution_variance(g, 1.0)[17];
    VarianceEstimate v;
    for (int r = 0; r < 2000; ++r) v.add(simulate_convolution(sample_noise(g, tg, 22, r)).values.at(tg.n_time(), 17));
    o.detail << "torus " << v.var() << " vs mode sum " << rho << " (se " << v.se() << ")";
    o.require(std::abs(v.var() - rho) < 3.0 * v.se(), "torus");
  }
}

void series_verdicts(Outcome& o, const ExperimentResult& r, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    const auto* row = find_row(r, n + ".decreasing");
    o.require(row && row->verdict == Verdict::Pass, n);
  }
  for (const auto& row : r.rows) {
    if (row.statistic.ends_with(".ratio")) o.detail << row.statistic << " " << row.value << "; ";
  }
}

// 4. equivalence harness for a bounded drift
void equivalence_sine(Outcome& o) {
  const auto cfg = config("equivalence_sine.yaml");
  o.require(cfg.weak_tests == 16 && cfg.resolutions == 3, "config scale");
  const auto r = run_experiment(cfg, 8);
  series_verdicts(o, r, {"mild_residual", "weak_residual", "regularized_mild_cauchy", "regularized_weak_cauchy"});
  o.require(r.pass(), "all verdicts");
}

// 5. δ drift through the mollification ladder
void delta_ladder(Outcome& o) {
  const auto cfg = config("equivalence_delta.yaml");
  o.require(cfg.mollification_levels == std::vector<double>{8, 16, 32, 64}, "ladder levels");
  const auto r = run_experiment(cfg, 8);
  std::vector<double> mild, weak;
  for (const auto& row : r.rows) {
    if (row.statistic == "ladder_mild_cauchy") mild.push_back(row.value);
    if (row.statistic == "ladder_weak_cauchy") weak.push_back(row.value);
  }
  o.detail << "mild ladder";
  for (double v : mild) o.detail << ' ' << v;
  o.detail << "; weak ladder";
  for (double v : weak) o.detail << ' ' << v;
  o.detail << "; ";
  o.require(mild.size() == 3 && weak.size() == 3, "ladder rows");
  const auto* mono = find_row(r, "ladder_monotone");
  o.require(mono && mono->verdict == Verdict::Pass, "monotone");
  series_verdicts(o, r, {"regularized_mild_cauchy", "regularized_weak_cauchy"});
}

// 6. sewing rates
SewingRateReport sewing(const DriftFn& f, double gamma, int realizations) {
  const Grid1D g(DomainSetup::periodic(), 32);
  const TimeGrid tg(1.0, 256);
  const SewingSetup setup;
  auto a = make_sewing_accumulator(setup), d = make_sewing_accumulator(setup);
  for (int i = 0; i < realizations; ++i) accumulate_sewing(a, d, simulate_convolution(sample_noise(g, tg, 11, i)), f, setup);
  return sewing_rate_report(a, d, setup, gamma, "acceptance");
}

void sewing_suite(Outcome& o) {
  const auto one = sewing([](double) { return 1.0; }, 0.0, 8);
  double worst_delta = 0.0;
  for (double v : one.delta_norms) worst_delta = std::max(worst_delta, v);
  o.detail << "f=1 slope " << one.a_slope.exponent << " max|dA| " << worst_delta << "; ";
  o.require(std::abs(one.a_slope.exponent - 1.0) <= 1e-6, "f=1 slope");
  o.require(one.delta_identically_zero && worst_delta < 1e-14, "f=1 additivity");
  const auto sign = sewing(MollifiedDrift(DriftSpec::sign(), 100.0).fn(), -0.25, 200);
  const auto delta = sewing(MollifiedDrift(DriftSpec::delta(), 100.0).fn(), -1.0, 200);
  for (const auto* r : {&sign, &delta}) {
    o.detail << "gamma " << r->gamma_input << " slope " << r->a_slope.exponent << " >= " << r->slope_threshold
             << ", alpha1 " << r->alpha1_hat.exponent << "; ";
    o.require(r->slope_ok && r->a_slope.exponent >= 1.0 + r->gamma_input / 4.0 - 0.1, "slope");
  }
}

// 7. Riemann-sum machinery and the reconstruction of K
void riemann_machinery(Outcome& o) {
  {
    const Grid1D g(DomainSetup::periodic(), 16);
    const TimeGrid tg(1.0, 64);
    const LambdaFunctional H(g, tg, [&](int m, std::span<const double> f) {
      double s = 0.0;
      for (int i = 0; i < g.n_nodes(); ++i) s += std::cos(0.1 * m * i) * f[i];
      return s * s;
    });
    const auto phi = TestFunction::trig(2).sample(g);
    const TimeTestFunction fixed = [&](double) { return phi; };
    double worst = 0.0;
    for (int n : {4, 16, 64}) {
      for (double t : {0.25, 0.6, 1.0}) {
        const double sum = riemann_nonlinear_integral(H, fixed, t, n);
        worst = std::max(worst, std::abs(sum - (H.value(tg.index_of(kappa_n(t, n)), phi) - H.value(0, phi))));
      }
    }
    o.detail << "telescoping " << worst << "; ";
    o.require(worst < 1e-12, "telescoping");
  }
  const std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  {
    const Grid1D g(DomainSetup::periodic(), 64);
    const TimeGrid tg(1.0, 256);
    const DriftFn c = [](double) { return 0.6; };
    const auto p = simulate_path({SchemeKind::SplittingExact, c}, sample_noise(g, tg, 5, 0), constant_field(g, 0.0));
    const auto r = reconstruct_R(DriftFunctional(p, c), 1.0, 20, eps, &p);
    o.detail << "b=c: R " << r.extrapolated << " vs 0.6; ";
    o.require(std::abs(r.extrapolated - 0.6) <= 1e-6, "b = c");
  }
  {
    const Grid1D g(DomainSetup::periodic(), 256);
    const TimeGrid tg(1.0, 256);
    const DriftFn s = [](double u) { return std::sin(u); };
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      const auto p = simulate_path({SchemeKind::SplittingExact, s}, sample_noise(g, tg, 6, k), constant_field(g, 0.0));
      for (int x : {0, 77, 128, 200}) worst = std::max(worst, reconstruct_R(DriftFunctional(p, s), 1.0, x, eps, &p).discrepancy);
    }
    o.detail << "b=sin: max |R - K| " << worst;
    o.require(worst <= 5e-3, "b = sin");
  }
}

// 8. pathwise uniqueness through coupled schemes
void uniqueness(Outcome& o) {
  const auto r = run_experiment(config("uniqueness_schemes.yaml"), 8);
  series_verdicts(o, r, {"coupling_distance"});
  o.require(config("uniqueness_schemes.yaml").resolutions == 3, "three levels");
}

// 9. byte-identical outputs through the CLI for 1 and 8 workers
std::map<std::string, std::string> cli_run(const std::string& experiment, const std::string& cfg, int workers,
                                           const std::string& format, const fs::path& dir) {
  fs::remove_all(dir);
  const std::string cmd = std::string("\"") + SHELAB_CLI + "\" " + experiment + " --config \"" + SHELAB_CONFIG_DIR + "/" +
                          cfg + "\" --workers " + std::to_string(workers) + " --format " + format + " --out-dir \"" +
                          dir.string() + "\" > /dev/null";
  std::map<std::string, std::string> files;
  if (std::system(cmd.c_str()) != 0) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "timing.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return files;
}

void determinism(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "shelab_acceptance";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate", "simulate_whole_line.yaml"}, {"kappa", "kappa_zero.yaml"},
      {"sewing", "sewing_delta.yaml"},          {"besov", "besov_delta.yaml"},
      {"equivalence", "equivalence_sine.yaml"}, {"uniqueness", "uniqueness_schemes.yaml"}};
  int files = 0;
  for (const auto& [experiment, cfg] : runs) {
    for (const std::string format : {"csv", "ndjson"}) {
      const auto a = cli_run(experiment, cfg, 1, format, root / "a");
      const auto b = cli_run(experiment, cfg, 1, format, root / "b");
      const auto c = cli_run(experiment, cfg, 8, format, root / "c");
      o.require(!a.empty() && a == b && a == c, experiment + " " + format);
      files += static_cast<int>(a.size());
    }
  }
  fs::remove_all(root);
  o.detail << files << " files identical across reruns and 1 vs 8 workers";
}

// 10. property suites
void properties(Outcome& o) {
  const DriftFn sine = [](double u) { return std::sin(u); };
  // random control
  {
    const Grid1D g(DomainSetup::periodic(), 32);
    const TimeGrid tg(1.0, 64);
    const auto p = simulate_path({SchemeKind::SplittingExact, sine}, sample_noise(g, tg, 5, 0), constant_field(g, 0.3));
    const auto c = check_control(p, sine, 64);
    o.detail << "control: additivity " << c.worst_additivity << ", excess " << c.worst_excess << "; ";
    o.require(c.additive && c.superadditive, "control");
  }
  // seminorm domination on every domain
  for (auto setup : {DomainSetup::periodic(), DomainSetup::neumann(), DomainSetup::whole_line(8.0)}) {
    const Grid1D g(setup, setup.kind == DomainKind::WholeLine ? 256 : 64);
    const TimeGrid tg(1.0, 128);
    const auto p = simulate_path({SchemeKind::SplittingExact, sine}, sample_noise(g, tg, 7, 0), constant_field(g, 0.5));
    o.require(fit_seminorm_domination(p, default_test_family(setup, true)).valid, "seminorm domination");
  }
  // Besov estimator: monotone in β, not increased by mollification
  {
    const auto e = estimate_besov_norm([](double x) { return x > 0 ? 1.0 : 0.0; }, -1.0, INFINITY);
    double prev = 0.0;
    bool mono = true;
    for (double beta : {-2.0, -1.5, -1.0, -0.5, -0.25, 0.0}) {
      mono = mono && e.value_at(beta) >= prev;
      prev = e.value_at(beta);
    }
    o.require(mono, "besov monotone in beta");
    const auto raw = estimate_besov_norm([](double u) { return u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0); }, -0.6, INFINITY);
    for (double n : {4.0, 16.0, 64.0, 256.0}) {
      o.require(estimate_besov_norm(MollifiedDrift(DriftSpec::sign(), n).fn(), -0.6, INFINITY).value <= 1.05 * raw.value,
                "besov mollification");
    }
  }
  // u = P_t u0 + K + V and the semigroup-shifted decomposition
  double worst = 0.0;
  for (auto kind : {SchemeKind::SplittingExact, SchemeKind::SemiImplicit}) {
    for (const auto& g : {Grid1D(DomainSetup::periodic(), 32), Grid1D(DomainSetup::neumann(), 32),
                          Grid1D(DomainSetup::whole_line(8.0), 128)}) {
      const TimeGrid tg(1.0, 64);
      const auto p = simulate_path({kind, sine}, sample_noise(g, tg, 5, 0), constant_field(g, 0.3));
      for (int m = 0; m <= tg.n_time(); ++m) {
        for (int i = 0; i < g.n_nodes(); ++i) {
          worst = std::max(worst, std::abs(p.u.at(m, i) - p.pu0.at(m, i) - p.K.at(m, i) - p.V.values.at(m, i)));
        }
      }
    }
  }
  o.detail << "decomposition " << worst;
  o.require(worst < 1e-12, "decomposition");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"kappa_law", kappa_law},
      {"kernel_identities", kernel_suite},
      {"stochastic_convolution_law", convolution_law},
      {"equivalence_sine", equivalence_sine},
      {"delta_mollification_ladder", delta_ladder},
      {"sewing_rates", sewing_suite},
      {"riemann_machinery", riemann_machinery},
      {"uniqueness_coupling", uniqueness},
      {"determinism", determinism},
      {"property_suites", properties},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
