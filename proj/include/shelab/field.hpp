#pragma once

#include <span>
#include <vector>

namespace shelab {

/// Dense row-major (time x space) array.
struct FieldRows {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  FieldRows() = default;
  FieldRows(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  std::span<double> row(int m) { return {data.data() + static_cast<std::size_t>(m) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const double> row(int m) const {
    return {data.data() + static_cast<std::size_t>(m) * cols, static_cast<std::size_t>(cols)};
  }
  double& at(int m, int i) { return data[static_cast<std::size_t>(m) * cols + i]; }
  double at(int m, int i) const { return data[static_cast<std::size_t>(m) * cols + i]; }
};

}  // namespace shelab
