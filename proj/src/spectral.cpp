#include "shelab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace shelab {

namespace fft {
namespace {

std::mutex plan_mutex;
std::map<std::pair<Kind, int>, fftw_plan>& plan_table() {
  static std::map<std::pair<Kind, int>, fftw_plan> table;
  return table;
}

fftw_plan get_plan(Kind kind, int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& table = plan_table();
  auto it = table.find({kind, n});
  if (it != table.end()) return it->second;
  std::vector<double> a(n), b(n);
  fftw_r2r_kind k = kind == Kind::R2HC ? FFTW_R2HC : kind == Kind::HC2R ? FFTW_HC2R : FFTW_REDFT00;
  fftw_plan plan = fftw_plan_r2r_1d(n, a.data(), b.data(), k, FFTW_ESTIMATE | FFTW_UNALIGNED);
  table.emplace(std::make_pair(kind, n), plan);
  return plan;
}

}  // namespace

void execute(Kind kind, int n, const double* in, double* out) {
  fftw_plan plan = get_plan(kind, n);
  if (kind == Kind::HC2R) {
    // hc2r may clobber its input
    thread_local std::vector<double> scratch;
    scratch.assign(in, in + n);
    fftw_execute_r2r(plan, scratch.data(), out);
  } else {
    fftw_execute_r2r(plan, const_cast<double*>(in), out);
  }
}

}  // namespace fft

SpectralBasis::SpectralBasis(const Grid1D& grid) : grid_(grid), n_(grid.n_nodes()) {
  lambda_.resize(n_);
  discrete_lambda_.resize(n_);
  mode_.resize(n_);
  const double pi = std::numbers::pi;
  const double dx = grid.dx();
  if (grid.kind() == DomainKind::NeumannUnit) {
    const int N = grid.n_space();
    for (int k = 0; k < n_; ++k) {
      mode_[k] = k;
      const double w = pi * k;
      lambda_[k] = 0.5 * w * w;
      const double s = std::sin(pi * k / (2.0 * N));
      discrete_lambda_[k] = 0.5 * 4.0 * s * s / (dx * dx);
    }
  } else {
    const double L = grid.setup().extent();
    for (int j = 0; j < n_; ++j) {
      const int k = std::min(j, n_ - j);
      mode_[j] = k;
      const double w = 2.0 * pi * k / L;
      lambda_[j] = 0.5 * w * w;
      const double s = std::sin(pi * k / n_);
      discrete_lambda_[j] = 0.5 * 4.0 * s * s / (dx * dx);
    }
  }
}

void SpectralBasis::forward(std::span<const double> field, std::span<double> coef) const {
  if (static_cast<int>(field.size()) != n_ || static_cast<int>(coef.size()) != n_) {
    throw ShapeError("SpectralBasis::forward: field does not match grid");
  }
  fft::execute(grid_.kind() == DomainKind::NeumannUnit ? fft::Kind::REDFT00 : fft::Kind::R2HC, n_,
               field.data(), coef.data());
}

void SpectralBasis::inverse(std::span<const double> coef, std::span<double> field) const {
  if (static_cast<int>(field.size()) != n_ || static_cast<int>(coef.size()) != n_) {
    throw ShapeError("SpectralBasis::inverse: field does not match grid");
  }
  double scale;
  if (grid_.kind() == DomainKind::NeumannUnit) {
    fft::execute(fft::Kind::REDFT00, n_, coef.data(), field.data());
    scale = 1.0 / (2.0 * grid_.n_space());
  } else {
    fft::execute(fft::Kind::HC2R, n_, coef.data(), field.data());
    scale = 1.0 / n_;
  }
  for (auto& v : field) v *= scale;
}

std::vector<double> SpectralBasis::forward(std::span<const double> field) const {
  std::vector<double> c(n_);
  forward(field, c);
  return c;
}

std::vector<double> SpectralBasis::inverse(std::span<const double> coef) const {
  std::vector<double> f(n_);
  inverse(coef, f);
  return f;
}

std::vector<double> SpectralBasis::heat_multiplier(double t) const {
  std::vector<double> m(n_);
  for (int j = 0; j < n_; ++j) m[j] = std::exp(-lambda_[j] * t);
  return m;
}

}  // namespace shelab
