#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace shelab {

using DriftFn = std::function<double(double)>;

enum class DriftForm {
  Zero,
  Constant,          // b = value
  Linear,            // b(u) = value * u
  Sine,              // b(u) = amplitude * sin(frequency * u)
  Sign,              // b(u) = sign(u)
  Indicator,         // b(u) = 1{lower <= u <= upper}
  PowerSingularity,  // b(u) = |u|^{-exponent} 1{|u| <= radius}
  AtomicMeasure,     // b = ∑ weights_i δ_{locations_i}
};

std::string to_string(DriftForm form);
DriftForm drift_form_from_string(const std::string& name);

/// Declared Besov regularity b ∈ B^β_q (q = +inf allowed).
struct Regularity {
  double beta = 0.0;
  double q = std::numeric_limits<double>::infinity();
};

struct DriftSpec {
  DriftForm form = DriftForm::Zero;
  double value = 0.0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double lower = 0.0;
  double upper = 1.0;
  double exponent = 0.5;
  double radius = 1.0;
  std::vector<double> locations;
  std::vector<double> weights;
  Regularity declared;

  static DriftSpec zero();
  static DriftSpec constant(double c);
  static DriftSpec linear(double rate);
  static DriftSpec sine(double amplitude = 1.0, double frequency = 1.0);
  static DriftSpec sign();
  static DriftSpec indicator(double lower, double upper);
  static DriftSpec power(double exponent, double radius = 1.0);
  static DriftSpec atomic(std::vector<double> locations, std::vector<double> weights);
  static DriftSpec delta() { return atomic({0.0}, {1.0}); }

  bool is_measure() const { return form == DriftForm::AtomicMeasure; }
  std::vector<std::string> violations() const;

  /// Pointwise value; throws for measures. The power singularity returns +inf at 0.
  double evaluate(double u) const;
  /// Average over [u - h/2, u + h/2]; finite at the singular point.
  double cell_average(double u, double h) const;
  /// ‖b‖_{L_p(ℝ)} where a closed form exists (power singularity, indicator).
  double lp_norm(double p) const;
};

/// Physicists' Gauss-Hermite rule: ∫ e^{-x²} f(x) dx ≈ ∑ w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite(int n);

/// G_ε f(u) = E f(u + √ε Z) by 64-node Gauss-Hermite.
double mollify_by_quadrature(const DriftFn& f, double eps, double u);

/// b^n = G_{1/n} b. Closed forms where they exist, exact Gaussian sums for
/// atoms, and a tabulated quadrature for the power singularity.
class MollifiedDrift {
 public:
  MollifiedDrift(DriftSpec base, double level);

  const DriftSpec& base() const { return base_; }
  double level() const { return level_; }
  double epsilon() const { return 1.0 / level_; }

  double operator()(double u) const;
  double derivative(double u) const;
  void apply(std::span<const double> u, std::span<double> out) const;

  DriftFn fn() const;
  DriftFn abs_fn() const;

  struct Table;  // interpolation table of the power-singularity convolution

 private:
  DriftSpec base_;
  double level_;
  std::shared_ptr<const Table> table_;
};

}  // namespace shelab
