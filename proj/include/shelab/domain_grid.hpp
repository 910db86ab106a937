#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shelab {

/// Raised when a field does not live on the grid an operator was built for.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DomainKind { PeriodicUnit, NeumannUnit, WholeLine };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// One of the three spatial setups. WholeLine is approximated by a torus of
/// circumference `torus_width` centred at the origin.
struct DomainSetup {
  DomainKind kind = DomainKind::PeriodicUnit;
  double torus_width = 1.0;

  static DomainSetup periodic() { return {DomainKind::PeriodicUnit, 1.0}; }
  static DomainSetup neumann() { return {DomainKind::NeumannUnit, 1.0}; }
  static DomainSetup whole_line(double width) { return {DomainKind::WholeLine, width}; }

  double extent() const { return kind == DomainKind::WholeLine ? torus_width : 1.0; }
  double left() const { return kind == DomainKind::WholeLine ? -0.5 * torus_width : 0.0; }

  /// Human readable violations for a run up to `horizon`; empty when valid.
  std::vector<std::string> violations(double horizon) const;
  void validate(double horizon) const;

  bool operator==(const DomainSetup&) const = default;
};

/// Uniform spatial grid. Periodic and whole-line grids use cell centres
/// x_i = left + (i + 1/2) dx, i < n_space; Neumann grids use the n_space + 1
/// cell nodes x_i = i dx so the reflection symmetry holds on the grid.
class Grid1D {
 public:
  Grid1D(DomainSetup setup, int n_space);

  const DomainSetup& setup() const { return setup_; }
  DomainKind kind() const { return setup_.kind; }
  int n_space() const { return n_space_; }
  int n_nodes() const { return static_cast<int>(weights_.size()); }
  double dx() const { return dx_; }

  /// Coordinate of node i, computed from the integer index.
  double node(int i) const;
  std::vector<double> nodes() const;

  /// Quadrature weights of the node set (dx, or trapezoid weights for Neumann).
  std::span<const double> weights() const { return weights_; }

  /// Whole-line observables are restricted to [-L/4, L/4]; other setups use every node.
  bool in_window(int i) const;

  /// Noise lives on cells of this width: dx, or dx/2 half-cells for Neumann.
  double noise_cell_width() const;
  int n_noise_cells() const;

  Grid1D coarsened() const;

  bool operator==(const Grid1D& other) const {
    return setup_ == other.setup_ && n_space_ == other.n_space_;
  }

 private:
  DomainSetup setup_;
  int n_space_;
  double dx_;
  std::vector<double> weights_;
};

class TimeGrid {
 public:
  TimeGrid(double horizon, int n_time);

  double horizon() const { return horizon_; }
  int n_time() const { return n_time_; }
  double dt() const { return dt_; }
  double time(int m) const { return horizon_ * static_cast<double>(m) / n_time_; }

  /// Grid index of t, snapping down to kappa(t) when t is off-grid.
  int index_of(double t, bool* snapped = nullptr) const;

  TimeGrid coarsened() const;

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && n_time_ == other.n_time_;
  }

 private:
  double horizon_;
  int n_time_;
  double dt_;
};

/// A point of the simplex {(s,t): 0 <= s <= t <= horizon}.
struct SimplexPair {
  double s;
  double t;
  SimplexPair(double s_, double t_, double horizon);
};

/// kappa_n(t) = floor(n t) / n, the left projection onto {0, 1/n, ..., 1}.
double kappa_n(double t, int n);

/// Partitions of [s,t] with 2^l equal pieces for l = 0..max_level.
std::vector<std::vector<double>> dyadic_partitions(double s, double t, int max_level);

}  // namespace shelab
