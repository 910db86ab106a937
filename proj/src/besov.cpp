#include "shelab/besov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shelab/spectral.hpp"

namespace shelab {

namespace {

double smooth_step(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / tau);
  const double b = std::exp(-1.0 / (1.0 - tau));
  return a / (a + b);
}

double window(double x, double radius) {
  const double ax = std::abs(x);
  if (ax <= 0.5 * radius) return 1.0;
  return smooth_step((radius - ax) / (0.5 * radius));
}

int block_of(int m, int top) {
  if (m == 0) return 0;
  int j = 0;
  while ((1 << j) <= m) ++j;
  return std::min(j, top);
}

double lq_norm(const std::vector<double>& v, double q, double dx) {
  if (std::isinf(q)) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), q);
  return std::pow(s * dx, 1.0 / q);
}

}  // namespace

double BesovEstimate::value_at(double b) const {
  double v = 0.0;
  for (std::size_t k = 0; k < block_norms.size(); ++k) {
    v = std::max(v, std::pow(2.0, b * block_index[k]) * block_norms[k]);
  }
  return v;
}

std::vector<double> besov_samples(const std::function<double(double)>& f, double radius, int log2_points) {
  const int n = 1 << log2_points;
  const double dx = 2.0 * radius / n;
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) {
    const double x = -radius + j * dx;
    const double w = window(x, radius);
    s[j] = w == 0.0 ? 0.0 : w * f(x);
  }
  return s;
}

BesovEstimate estimate_besov_norm_sampled(const std::vector<double>& samples, double beta, double q,
                                          double radius) {
  if (!(beta >= -2.0 && beta <= 1.0)) throw std::domain_error("estimate_besov_norm: beta outside [-2, 1]");
  if (!(q >= 1.0)) throw std::domain_error("estimate_besov_norm: q must be >= 1");
  const int n = static_cast<int>(samples.size());
  if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("estimate_besov_norm: sample count must be 2^k");
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  const int top = log2n - 1;
  const double dx = 2.0 * radius / n;

  std::vector<double> coef(n);
  fft::execute(fft::Kind::R2HC, n, samples.data(), coef.data());

  BesovEstimate est;
  est.window_radius = radius;
  est.beta = beta;
  est.q = q;
  std::vector<int> blocks{0};
  for (int j = 1; j <= top; ++j) blocks.push_back(j);

  double total_energy = 0.0, top_energy = 0.0;
  std::vector<double> part(n), field(n);
  for (int b : blocks) {
    std::fill(part.begin(), part.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      const int m = std::min(s, n - s);
      if (block_of(m, top) != b) continue;
      part[s] = coef[s];
      const double e = (s == 0 || 2 * s == n) ? coef[s] * coef[s] : 2.0 * coef[s] * coef[s];
      total_energy += e;
      if (b == top) top_energy += e;
    }
    fft::execute(fft::Kind::HC2R, n, part.data(), field.data());
    for (auto& v : field) v /= n;
    est.block_index.push_back(b);
    est.block_norms.push_back(lq_norm(field, q, dx));
  }
  est.value = est.value_at(beta);
  est.aliasing = total_energy > 0.0 && top_energy > 0.01 * total_energy;
  return est;
}

BesovEstimate estimate_besov_norm(const std::function<double(double)>& f, double beta, double q, double radius,
                                  int log2_points) {
  return estimate_besov_norm_sampled(besov_samples(f, radius, log2_points), beta, q, radius);
}

double windowed_lp_norm(const std::function<double(double)>& f, double p, double radius, int log2_points) {
  const auto s = besov_samples(f, radius, log2_points);
  return lq_norm(s, p, 2.0 * radius / s.size());
}

double besov_embedding_constant(double p, double radius) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::domain_error("embedding constant is only established for p in [1, 2]");
  // Hausdorff-Young on [-R, R) plus a mode count bound every weighted block
  // by (2R)^{-1/p} ||f||_p; the extra 2^{1/p} covers the sampling quadrature
  return std::pow(radius, -1.0 / p);
}

namespace {

constexpr double kCauchyFloor = 1e-13;

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(std::max(y[i], 1e-300));
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dxl = std::log(x[i]) - mx;
    sxy += dxl * (std::log(std::max(y[i], 1e-300)) - my);
    sxx += dxl * dxl;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

ConvergenceReport check_convergence_callables(const std::vector<std::function<double(double)>>& sequence,
                                              const std::vector<double>& levels, double beta, double radius) {
  if (sequence.size() != levels.size() || sequence.size() < 2) {
    throw std::invalid_argument("convergence check needs at least two levels");
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw std::invalid_argument("levels must increase");
  }
  ConvergenceReport r;
  r.levels = levels;
  std::vector<std::vector<double>> samples;
  for (const auto& f : sequence) samples.push_back(besov_samples(f, radius));
  for (const auto& s : samples) {
    r.estimates_at_beta.push_back(estimate_besov_norm_sampled(s, beta, std::numeric_limits<double>::infinity(), radius).value);
  }
  r.sup = *std::max_element(r.estimates_at_beta.begin(), r.estimates_at_beta.end());
  r.growth_slope = log_slope(r.levels, r.estimates_at_beta);
  r.bounded = std::isfinite(r.sup) && r.growth_slope < kBoundedSlope;

  r.probe_betas = {beta - 0.1, beta - 0.25, beta - 0.5};
  r.cauchy = true;
  for (double bp : r.probe_betas) {
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      std::vector<double> d(samples[i].size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = samples[i + 1][k] - samples[i][k];
      diffs.push_back(estimate_besov_norm_sampled(d, std::max(bp, -2.0), std::numeric_limits<double>::infinity(), radius).value);
    }
    // Doubling the level moves spectral mass by half a dyadic block, so
    // consecutive differences may wobble; require decay along the ladder.
    const bool at_floor = *std::max_element(diffs.begin(), diffs.end()) <= kCauchyFloor;
    if (!at_floor) {
      std::vector<double> lv(r.levels.begin() + 1, r.levels.end());
      if (diffs.size() < 2 || !(log_slope(lv, diffs) < 0.0) || !(diffs.back() < diffs.front())) r.cauchy = false;
    }
    r.cross_differences.push_back(std::move(diffs));
  }
  r.pass = r.bounded && r.cauchy;
  if (!r.bounded) r.note = "estimate at beta grows with the level";
  else if (!r.cauchy) r.note = "cross differences are not decreasing";
  return r;
}

ConvergenceReport check_c_beta_minus_convergence(const std::vector<MollifiedDrift>& sequence,
                                                 const DriftSpec& target, double beta, double radius) {
  std::vector<std::function<double(double)>> fs;
  std::vector<double> levels;
  for (const auto& m : sequence) {
    if (m.base().form != target.form) throw std::invalid_argument("sequence does not mollify the target drift");
    fs.push_back(m.fn());
    levels.push_back(m.level());
  }
  auto r = check_convergence_callables(fs, levels, beta, radius);
  r.note += r.note.empty() ? "surrogate norm" : "; surrogate norm";
  return r;
}

}  // namespace shelab
