#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace dsmc {

/// Uniform cell-centred grid over the square aquifer [0, 6] x [0, 6].
///
/// Cells are stored row-major with x1 running fastest: index = j * nx + i.
struct Grid {
  static constexpr double kExtent = 6.0;

  int nx = 0;
  int ny = 0;

  Grid() = default;
  Grid(int nx_, int ny_);

  [[nodiscard]] double hx() const noexcept { return kExtent / nx; }
  [[nodiscard]] double hy() const noexcept { return kExtent / ny; }
  [[nodiscard]] double cell_area() const noexcept { return hx() * hy(); }
  [[nodiscard]] int size() const noexcept { return nx * ny; }
  [[nodiscard]] int index(int i, int j) const noexcept { return j * nx + i; }
  [[nodiscard]] double xc(int i) const noexcept { return (i + 0.5) * hx(); }
  [[nodiscard]] double yc(int j) const noexcept { return (j + 0.5) * hy(); }

  /// Grid with each axis refined by an integer factor.
  [[nodiscard]] Grid refined(int factor) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Scalar values on the cells of a grid.
struct GridField {
  Grid grid;
  Eigen::VectorXd values;

  GridField() = default;
  explicit GridField(const Grid& g, double fill = 0.0);
  GridField(const Grid& g, Eigen::VectorXd v);

  [[nodiscard]] double at(int i, int j) const { return values[grid.index(i, j)]; }
  double& at(int i, int j) { return values[grid.index(i, j)]; }
};

/// Coarse-grid field sampled from a field on an integer-refined grid: each
/// coarse cell centre is the shared corner of its fine children, so its value
/// is the average of those children.
GridField restrict_to(const GridField& fine, const Grid& coarse);

}  // namespace dsmc
