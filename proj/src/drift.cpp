#include "shelab/drift.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace shelab {

std::string to_string(DriftForm form) {
  switch (form) {
    case DriftForm::Zero: return "zero";
    case DriftForm::Constant: return "constant";
    case DriftForm::Linear: return "linear";
    case DriftForm::Sine: return "sine";
    case DriftForm::Sign: return "sign";
    case DriftForm::Indicator: return "indicator";
    case DriftForm::PowerSingularity: return "power";
    case DriftForm::AtomicMeasure: return "atomic";
  }
  return "unknown";
}

DriftForm drift_form_from_string(const std::string& name) {
  for (auto f : {DriftForm::Zero, DriftForm::Constant, DriftForm::Linear, DriftForm::Sine, DriftForm::Sign,
                 DriftForm::Indicator, DriftForm::PowerSingularity, DriftForm::AtomicMeasure}) {
    if (to_string(f) == name) return f;
  }
  if (name == "delta") return DriftForm::AtomicMeasure;
  throw std::invalid_argument("unknown drift form '" + name + "'");
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DriftSpec DriftSpec::zero() { return DriftSpec{}; }

DriftSpec DriftSpec::constant(double c) {
  DriftSpec s;
  s.form = DriftForm::Constant;
  s.value = c;
  return s;
}

DriftSpec DriftSpec::linear(double rate) {
  DriftSpec s;
  s.form = DriftForm::Linear;
  s.value = rate;
  return s;
}

DriftSpec DriftSpec::sine(double amplitude, double frequency) {
  DriftSpec s;
  s.form = DriftForm::Sine;
  s.amplitude = amplitude;
  s.frequency = frequency;
  return s;
}

DriftSpec DriftSpec::sign() {
  DriftSpec s;
  s.form = DriftForm::Sign;
  return s;
}

DriftSpec DriftSpec::indicator(double lower, double upper) {
  DriftSpec s;
  s.form = DriftForm::Indicator;
  s.lower = lower;
  s.upper = upper;
  return s;
}

DriftSpec DriftSpec::power(double exponent, double radius) {
  DriftSpec s;
  s.form = DriftForm::PowerSingularity;
  s.exponent = exponent;
  s.radius = radius;
  // in L_p for every p < 1/exponent
  s.declared = {-exponent, kInf};
  return s;
}

DriftSpec DriftSpec::atomic(std::vector<double> locations, std::vector<double> weights) {
  DriftSpec s;
  s.form = DriftForm::AtomicMeasure;
  s.locations = std::move(locations);
  s.weights = std::move(weights);
  s.declared = {-1.0, kInf};
  return s;
}

std::vector<std::string> DriftSpec::violations() const {
  std::vector<std::string> v;
  switch (form) {
    case DriftForm::PowerSingularity:
      if (!(exponent > 0.0 && exponent < 1.0)) {
        v.push_back("power exponent must lie in (0, 1) for local integrability");
      }
      if (!(radius > 0.0)) v.push_back("power radius must be positive");
      break;
    case DriftForm::Indicator:
      if (!(lower < upper)) v.push_back("indicator needs lower < upper");
      break;
    case DriftForm::AtomicMeasure:
      if (locations.empty()) v.push_back("atomic measure needs at least one atom");
      if (locations.size() != weights.size()) v.push_back("atomic locations and weights differ in length");
      if (declared.q == kInf && declared.beta > -1.0) {
        v.push_back("atomic measure cannot be declared smoother than C^{-1}");
      }
      break;
    case DriftForm::Sine:
      if (!std::isfinite(amplitude) || !std::isfinite(frequency)) v.push_back("sine parameters must be finite");
      break;
    default:
      break;
  }
  return v;
}

double DriftSpec::evaluate(double u) const {
  switch (form) {
    case DriftForm::Zero: return 0.0;
    case DriftForm::Constant: return value;
    case DriftForm::Linear: return value * u;
    case DriftForm::Sine: return amplitude * std::sin(frequency * u);
    case DriftForm::Sign: return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    case DriftForm::Indicator: return (u >= lower && u <= upper) ? 1.0 : 0.0;
    case DriftForm::PowerSingularity:
      if (std::abs(u) > radius) return 0.0;
      return u == 0.0 ? kInf : std::pow(std::abs(u), -exponent);
    case DriftForm::AtomicMeasure:
      throw std::domain_error("an atomic measure has no pointwise values");
  }
  return 0.0;
}

double DriftSpec::cell_average(double u, double h) const {
  if (!(h > 0.0)) return evaluate(u);
  const double a = u - 0.5 * h, b = u + 0.5 * h;
  switch (form) {
    case DriftForm::PowerSingularity: {
      auto prim = [&](double y) {
        y = std::clamp(y, -radius, radius);
        const double m = std::pow(std::abs(y), 1.0 - exponent) / (1.0 - exponent);
        return y < 0.0 ? -m : m;
      };
      return (prim(b) - prim(a)) / h;
    }
    case DriftForm::Sign:
      return (std::max(0.0, b - std::max(a, 0.0)) - std::max(0.0, std::min(b, 0.0) - a)) / h;
    case DriftForm::Indicator:
      return std::max(0.0, std::min(b, upper) - std::max(a, lower)) / h;
    case DriftForm::AtomicMeasure: {
      double s = 0.0;
      for (std::size_t i = 0; i < locations.size(); ++i) {
        if (locations[i] >= a && locations[i] < b) s += weights[i];
      }
      return s / h;
    }
    case DriftForm::Sine:
      return amplitude * (std::cos(frequency * a) - std::cos(frequency * b)) / (frequency * h);
    default:
      return evaluate(u);
  }
}

double DriftSpec::lp_norm(double p) const {
  switch (form) {
    case DriftForm::Zero: return 0.0;
    case DriftForm::PowerSingularity: {
      if (p == kInf) return kInf;
      if (exponent * p >= 1.0) return kInf;
      return std::pow(2.0 * std::pow(radius, 1.0 - exponent * p) / (1.0 - exponent * p), 1.0 / p);
    }
    case DriftForm::Indicator:
      return p == kInf ? 1.0 : std::pow(upper - lower, 1.0 / p);
    default:
      throw std::domain_error("no closed-form L_p norm for drift form " + to_string(form));
  }
}

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> rules;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = rules.find(n);
  if (it != rules.end()) return it->second;
  // Newton iteration on orthonormal Hermite polynomials with the classic
  // asymptotic starting guesses.
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  return rules.emplace(n, std::move(rule)).first->second;
}

double mollify_by_quadrature(const DriftFn& f, double eps, double u) {
  const auto& rule = gauss_hermite(64);
  const double s = std::sqrt(2.0 * eps);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(u + s * rule.nodes[i]);
  return sum / std::sqrt(std::numbers::pi);
}

// Tabulated G_ε(|·|^{-γ} 1{|·| <= R}) on u >= 0 (the function is even),
// with exact derivatives so the cubic Hermite interpolant is O(h^4).
struct MollifiedDrift::Table {
  double step = 0.0;
  double end = 0.0;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>> value;
};

namespace {

constexpr double kTableFraction = 40.0;  // table step = √ε / 40
constexpr double kReach = 12.0;          // Gaussian tail cut, in units of √ε

// ∫_0^R y^{-γ} g_ε(u - y) dy and its u-derivative. With y = v^e, e = 1/(1-γ),
// the Jacobian cancels y^{-γ} exactly and the integrand is e g_ε(u - v^e).
std::pair<double, double> half_line_integral(double u, double gamma, double radius, double eps) {
  using boost::math::quadrature::gauss_kronrod;
  const double se = std::sqrt(eps);
  const double lo = std::max(0.0, u - kReach * se);
  const double hi = std::min(radius, u + kReach * se);
  if (lo >= hi) return {0.0, 0.0};
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
  const double e = 1.0 / (1.0 - gamma);
  auto g = [&](double z) { return c * std::exp(-z * z / (2.0 * eps)); };
  auto fv = [&](double v) { return e * g(u - std::pow(v, e)); };
  auto fd = [&](double v) {
    const double z = u - std::pow(v, e);
    return -e * z / eps * g(z);
  };
  auto to_v = [&](double y) { return std::pow(y, 1.0 - gamma); };
  // split at the peak so each piece is unimodal
  std::vector<double> cuts{to_v(lo)};
  if (u > lo && u < hi) cuts.push_back(to_v(u));
  cuts.push_back(to_v(hi));
  double val = 0.0, der = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    val += gauss_kronrod<double, 31>::integrate(fv, cuts[k], cuts[k + 1], 12, 1e-13);
    der += gauss_kronrod<double, 31>::integrate(fd, cuts[k], cuts[k + 1], 12, 1e-13);
  }
  return {val, der};
}

using TableKey = std::tuple<double, double, double>;

std::shared_ptr<const MollifiedDrift::Table> build_table(double gamma, double radius, double eps) {
  static std::mutex mutex;
  static std::map<TableKey, std::shared_ptr<const MollifiedDrift::Table>> cache;
  const TableKey key{gamma, radius, eps};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto t = std::make_shared<MollifiedDrift::Table>();
  const double se = std::sqrt(eps);
  t->step = se / kTableFraction;
  const int n = static_cast<int>(std::ceil((radius + kReach * se) / t->step)) + 2;
  t->end = (n - 1) * t->step;
  std::vector<double> y(n), dy(n);
  for (int i = 0; i < n; ++i) {
    const double u = i * t->step;
    const auto pos = half_line_integral(u, gamma, radius, eps);
    const auto neg = half_line_integral(-u, gamma, radius, eps);
    y[i] = pos.first + neg.first;
    dy[i] = pos.second - neg.second;
  }
  t->value = std::make_unique<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>>(
      std::move(y), std::move(dy), 0.0, t->step);
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() > 64) cache.clear();
  cache.emplace(key, t);
  return t;
}

}  // namespace

MollifiedDrift::MollifiedDrift(DriftSpec base, double level) : base_(std::move(base)), level_(level) {
  if (!(level >= 1.0)) throw std::invalid_argument("mollification level must be >= 1");
  const auto v = base_.violations();
  if (!v.empty()) throw std::invalid_argument(v.front());
  if (base_.form == DriftForm::PowerSingularity) {
    table_ = build_table(base_.exponent, base_.radius, epsilon());
  }
}

double MollifiedDrift::operator()(double u) const {
  const double eps = epsilon();
  const double se = std::sqrt(eps);
  switch (base_.form) {
    case DriftForm::Zero: return 0.0;
    case DriftForm::Constant: return base_.value;
    case DriftForm::Linear: return base_.value * u;
    case DriftForm::Sine: {
      const double w = base_.frequency;
      return base_.amplitude * std::exp(-0.5 * eps * w * w) * std::sin(w * u);
    }
    case DriftForm::Sign: return std::erf(u / (std::numbers::sqrt2 * se));
    case DriftForm::Indicator: {
      const double r = 1.0 / std::numbers::sqrt2;
      return 0.5 * (std::erfc((base_.lower - u) / se * r) - std::erfc((base_.upper - u) / se * r));
    }
    case DriftForm::PowerSingularity: {
      const double a = std::abs(u);
      if (a >= table_->end) return 0.0;
      return (*table_->value)(a);
    }
    case DriftForm::AtomicMeasure: {
      const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
      double s = 0.0;
      for (std::size_t i = 0; i < base_.locations.size(); ++i) {
        const double z = u - base_.locations[i];
        s += base_.weights[i] * c * std::exp(-z * z / (2.0 * eps));
      }
      return s;
    }
  }
  return 0.0;
}

double MollifiedDrift::derivative(double u) const {
  const double eps = epsilon();
  switch (base_.form) {
    case DriftForm::Zero:
    case DriftForm::Constant: return 0.0;
    case DriftForm::Linear: return base_.value;
    case DriftForm::Sine: {
      const double w = base_.frequency;
      return base_.amplitude * w * std::exp(-0.5 * eps * w * w) * std::cos(w * u);
    }
    case DriftForm::Sign: {
      const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
      return 2.0 * c * std::exp(-u * u / (2.0 * eps));
    }
    case DriftForm::Indicator: {
      const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
      const double a = u - base_.lower, b = u - base_.upper;
      return c * (std::exp(-a * a / (2.0 * eps)) - std::exp(-b * b / (2.0 * eps)));
    }
    case DriftForm::PowerSingularity: {
      const double a = std::abs(u);
      if (a >= table_->end) return 0.0;
      const double d = table_->value->prime(a);
      return u < 0.0 ? -d : d;
    }
    case DriftForm::AtomicMeasure: {
      const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
      double s = 0.0;
      for (std::size_t i = 0; i < base_.locations.size(); ++i) {
        const double z = u - base_.locations[i];
        s -= base_.weights[i] * c * z / eps * std::exp(-z * z / (2.0 * eps));
      }
      return s;
    }
  }
  return 0.0;
}

void MollifiedDrift::apply(std::span<const double> u, std::span<double> out) const {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (*this)(u[i]);
}

DriftFn MollifiedDrift::fn() const {
  return [self = *this](double u) { return self(u); };
}

DriftFn MollifiedDrift::abs_fn() const {
  return [self = *this](double u) { return std::abs(self(u)); };
}

}  // namespace shelab
