#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shelab/domain_grid.hpp"
#include "shelab/drift.hpp"
#include "shelab/solver.hpp"

namespace shelab {

enum class TestFamily { TrigPeriodic, CosineNeumann, HermiteWholeLine, GaussianBump };

class TestFunction {
 public:
  /// cos(2πkx), or sin(2πkx) when `sine`.
  static TestFunction trig(int k, bool sine = false);
  /// cos(πkx); satisfies φ'(0) = φ'(1) = 0.
  static TestFunction cosine(int k);
  /// L2-normalized Hermite function of index k.
  static TestFunction hermite(int k);
  /// exp(-(x-c)²/(2w²)), periodized on the unit torus, even-reflected for
  /// Neumann, plain on the line.
  static TestFunction bump(double center, double width, DomainKind extension);

  TestFamily family() const { return family_; }
  int index() const { return k_; }
  std::string name() const;
  bool compatible(DomainKind kind) const;

  double value(double x) const { return derivative(x, 0); }
  /// d^order φ / dx^order, order <= 12.
  double derivative(double x, int order) const;

  std::vector<double> sample(const Grid1D& grid, int order = 0) const;

 private:
  TestFamily family_ = TestFamily::TrigPeriodic;
  int k_ = 0;
  bool sine_ = false;
  double center_ = 0.0;
  double width_ = 1.0;
  DomainKind extension_ = DomainKind::PeriodicUnit;
};

/// Families used by default on each setup.
std::vector<TestFunction> default_test_family(const DomainSetup& setup, bool with_bumps = false);

/// ⟨f, φ⟩ by node quadrature; the whole-line window restricts the sum to
/// [-L/4, L/4] unless `window` is false.
double pair(const Grid1D& grid, std::span<const double> f, const TestFunction& phi, bool window = true);
double pair_nodes(const Grid1D& grid, std::span<const double> f, std::span<const double> phi_nodes,
                  bool window = true);

/// ∑_{i<=m} ∫_D (1 + |x|^m)² |φ^{(i)}(x)|² dx.
double schwartz_seminorm(const TestFunction& phi, int m, const DomainSetup& setup);

enum class DriftTerm { DirectIntegral, RiemannK };

struct WeakResidualReport {
  std::string phi;
  std::vector<double> times;
  std::vector<double> residuals;
  DriftTerm drift_term_used = DriftTerm::DirectIntegral;
};

/// ⟨u_t,φ⟩ - ⟨u_0,φ⟩ - ∫⟨u_s,½Δφ⟩ - ∫⟨b(u_s),φ⟩ - W_t(φ) at every grid time.
/// Time integrals use the trapezoid rule (DirectIntegral) or the left Riemann
/// sum of the drift functional (RiemannK). Whole-line pairings run over the
/// full torus so that integration by parts holds.
WeakResidualReport weak_residual_report(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                                        const TestFunction& phi, DriftTerm term = DriftTerm::DirectIntegral);
double weak_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                     const TestFunction& phi, double t);

/// Residual of ⟨u_t,f_t⟩ = ⟨u_0,f_0⟩ + ∫⟨b(u_s),f_s⟩ds + ∫∫ f dW with f_s = P_{t-s}φ.
double time_dependent_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                               const TestFunction& phi, double t);
/// Residual of ⟨u_t,φ⟩ = ⟨P_t u_0,φ⟩ + ∫⟨b(u_s),P_{t-s}φ⟩ds + ∫∫ P_{t-s}φ dW.
double semigroup_residual(const FieldPath& path, const NoiseRealization& noise, const DriftFn& drift,
                          const TestFunction& phi, double t);

/// A functional ℋ_{t_m}(φ) sampled at grid times, φ given at the nodes.
class TimeFunctional {
 public:
  virtual ~TimeFunctional() = default;
  virtual const Grid1D& grid() const = 0;
  virtual const TimeGrid& tgrid() const = 0;
  virtual double value(int m, std::span<const double> phi) const = 0;
  virtual double increment(int m0, int m1, std::span<const double> phi) const {
    return value(m1, phi) - value(m0, phi);
  }
};

/// ℋ_t(φ) = ∑_{t_m < t} dt ⟨b(u_m), φ⟩.
class DriftFunctional : public TimeFunctional {
 public:
  DriftFunctional(const FieldPath& path, const DriftFn& drift);
  const Grid1D& grid() const override { return grid_; }
  const TimeGrid& tgrid() const override { return tgrid_; }
  double value(int m, std::span<const double> phi) const override { return increment(0, m, phi); }
  double increment(int m0, int m1, std::span<const double> phi) const override;

 private:
  Grid1D grid_;
  TimeGrid tgrid_;
  FieldRows b_;
};

class LambdaFunctional : public TimeFunctional {
 public:
  using Fn = std::function<double(int, std::span<const double>)>;
  LambdaFunctional(const Grid1D& grid, const TimeGrid& tgrid, Fn fn) : grid_(grid), tgrid_(tgrid), fn_(std::move(fn)) {}
  const Grid1D& grid() const override { return grid_; }
  const TimeGrid& tgrid() const override { return tgrid_; }
  double value(int m, std::span<const double> phi) const override { return fn_(m, phi); }

 private:
  Grid1D grid_;
  TimeGrid tgrid_;
  Fn fn_;
};

/// f_s sampled at the nodes.
using TimeTestFunction = std::function<std::vector<double>(double s)>;

/// ∑_{i=1}^{⌊n t⌋} (ℋ_{i/n} - ℋ_{(i-1)/n})(f_{(i-1)/n}); 1/n must be a multiple of dt.
double riemann_nonlinear_integral(const TimeFunctional& H, const TimeTestFunction& f, double t, int n);

/// Error model used to extrapolate R(ε) to ε = 0 from the last three ε.
enum class ExtrapolationModel { Linear, Sqrt, SqrtLinear };
std::string to_string(ExtrapolationModel model);

struct ReconstructionReport {
  std::vector<double> epsilons;
  std::vector<double> values;
  std::vector<double> cauchy_differences;
  bool cauchy = false;
  double extrapolated = 0.0;
  ExtrapolationModel model = ExtrapolationModel::Linear;
  double cross_check = 0.0;  // u_t - P_t u0 - V_t when a path is supplied
  double discrepancy = 0.0;
};

/// R(ε) = riemann sum with f_r = p_{t-r}(x, ·) stopped at t - ε, extrapolated ε -> 0.
ReconstructionReport reconstruct_R(const TimeFunctional& H, double t, int x_index, const std::vector<double>& epsilons,
                                   const FieldPath* path = nullptr,
                                   ExtrapolationModel model = ExtrapolationModel::Linear);

/// Value at ε = 0 of the model fitted by least squares to (eps, values).
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values, ExtrapolationModel model);

struct SeminormDomination {
  int m = -1;
  double gamma = 0.0;
  bool valid = false;
  std::vector<double> ratios;  // sup_t |⟨u_t,φ⟩| / (Γ ‖φ‖_m) per family member
};

/// Fit Γ on even-indexed members for the smallest m <= 8 such that the
/// odd-indexed members satisfy the bound with a factor-2 margin.
SeminormDomination fit_seminorm_domination(const FieldPath& path, const std::vector<TestFunction>& family);

}  // namespace shelab
