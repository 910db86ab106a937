#include "shelab/domain_grid.hpp"

#include <cmath>
#include <sstream>

namespace shelab {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::PeriodicUnit: return "periodic";
    case DomainKind::NeumannUnit: return "neumann";
    case DomainKind::WholeLine: return "whole_line";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "periodic") return DomainKind::PeriodicUnit;
  if (name == "neumann") return DomainKind::NeumannUnit;
  if (name == "whole_line") return DomainKind::WholeLine;
  throw std::invalid_argument("unknown domain kind '" + name + "'");
}

std::vector<std::string> DomainSetup::violations(double horizon) const {
  std::vector<std::string> out;
  if (!(horizon > 0.0 && horizon <= 1.0)) {
    out.push_back("horizon must lie in (0, 1]");
  }
  if (kind == DomainKind::WholeLine) {
    const double needed = 8.0 * std::sqrt(std::max(horizon, 0.0));
    if (!(torus_width >= needed)) {
      std::ostringstream msg;
      msg << "torus_width " << torus_width << " < 8*sqrt(horizon) = " << needed;
      out.push_back(msg.str());
    }
  } else if (torus_width != 1.0) {
    out.push_back("torus_width only applies to whole_line");
  }
  return out;
}

void DomainSetup::validate(double horizon) const {
  auto v = violations(horizon);
  if (!v.empty()) throw std::invalid_argument(v.front());
}

Grid1D::Grid1D(DomainSetup setup, int n_space) : setup_(setup), n_space_(n_space) {
  if (n_space < 2) throw std::invalid_argument("Grid1D needs at least 2 cells");
  if (!(setup.extent() > 0.0)) throw std::invalid_argument("domain extent must be positive");
  dx_ = setup.extent() / n_space;
  if (setup.kind == DomainKind::NeumannUnit) {
    weights_.assign(n_space + 1, dx_);
    weights_.front() = weights_.back() = 0.5 * dx_;
  } else {
    weights_.assign(n_space, dx_);
  }
}

double Grid1D::node(int i) const {
  if (setup_.kind == DomainKind::NeumannUnit) return static_cast<double>(i) / n_space_;
  return setup_.left() + setup_.extent() * (static_cast<double>(i) + 0.5) / n_space_;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(n_nodes());
  for (int i = 0; i < n_nodes(); ++i) x[i] = node(i);
  return x;
}

bool Grid1D::in_window(int i) const {
  if (setup_.kind != DomainKind::WholeLine) return true;
  return std::abs(node(i)) <= 0.25 * setup_.torus_width;
}

double Grid1D::noise_cell_width() const {
  return setup_.kind == DomainKind::NeumannUnit ? 0.5 * dx_ : dx_;
}

int Grid1D::n_noise_cells() const {
  return setup_.kind == DomainKind::NeumannUnit ? 2 * n_space_ : n_space_;
}

Grid1D Grid1D::coarsened() const {
  if (n_space_ % 2 != 0) throw ShapeError("cannot coarsen a grid with an odd cell count");
  return Grid1D(setup_, n_space_ / 2);
}

TimeGrid::TimeGrid(double horizon, int n_time) : horizon_(horizon), n_time_(n_time) {
  if (!(horizon > 0.0 && horizon <= 1.0)) throw std::invalid_argument("horizon must lie in (0, 1]");
  if (n_time < 1) throw std::invalid_argument("TimeGrid needs at least one step");
  dt_ = horizon / n_time;
}

int TimeGrid::index_of(double t, bool* snapped) const {
  if (t < 0.0 || t > horizon_ * (1.0 + 1e-12)) throw std::domain_error("time outside [0, horizon]");
  const double scaled = t / dt_;
  const double nearest = std::round(scaled);
  int m;
  bool off = false;
  if (std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, scaled)) {
    m = static_cast<int>(nearest);
  } else {
    m = static_cast<int>(std::floor(scaled));
    off = true;
  }
  if (m > n_time_) m = n_time_;
  if (snapped) *snapped = off;
  return m;
}

TimeGrid TimeGrid::coarsened() const {
  if (n_time_ % 2 != 0) throw ShapeError("cannot coarsen an odd number of time steps");
  return TimeGrid(horizon_, n_time_ / 2);
}

SimplexPair::SimplexPair(double s_, double t_, double horizon) : s(s_), t(t_) {
  if (!(0.0 <= s && s <= t && t <= horizon)) throw std::domain_error("need 0 <= s <= t <= horizon");
}

double kappa_n(double t, int n) {
  if (n < 1) throw std::invalid_argument("kappa_n needs n >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("kappa_n: t outside [0, 1]");
  // n * (m / n) can round below m; settle on the largest m with m / n <= t
  double m = std::floor(n * t);
  while ((m + 1.0) / n <= t) m += 1.0;
  while (m > 0.0 && m / n > t) m -= 1.0;
  return m / n;
}

std::vector<std::vector<double>> dyadic_partitions(double s, double t, int max_level) {
  if (!(s < t)) throw std::invalid_argument("dyadic_partitions needs s < t");
  if (max_level < 0 || max_level > 16) throw std::invalid_argument("max_level must be in [0, 16]");
  std::vector<std::vector<double>> levels;
  levels.reserve(max_level + 1);
  for (int l = 0; l <= max_level; ++l) {
    const std::int64_t pieces = std::int64_t{1} << l;
    std::vector<double> pts(pieces + 1);
    for (std::int64_t i = 0; i <= pieces; ++i) {
      pts[i] = s + (t - s) * static_cast<double>(i) / static_cast<double>(pieces);
    }
    pts.back() = t;
    levels.push_back(std::move(pts));
  }
  return levels;
}

}  // namespace shelab
