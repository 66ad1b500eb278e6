#include "grid.hpp"

#include "error.hpp"

#include <string>

namespace dsmc {

Grid::Grid(int nx_, int ny_) : nx(nx_), ny(ny_) {
  require(nx >= 1 && ny >= 1, ErrorKind::InvalidArgument,
          "grid needs at least one cell per axis, got " + std::to_string(nx) + "x" + std::to_string(ny));
}

Grid Grid::refined(int factor) const {
  require(factor >= 1, ErrorKind::InvalidArgument, "refinement factor must be >= 1");
  return Grid(nx * factor, ny * factor);
}

GridField::GridField(const Grid& g, double fill) : grid(g), values(Eigen::VectorXd::Constant(g.size(), fill)) {}

GridField::GridField(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  require(values.size() == grid.size(), ErrorKind::Dimension,
          "field length " + std::to_string(values.size()) + " does not match grid size " +
              std::to_string(grid.size()));
}

GridField restrict_to(const GridField& fine, const Grid& coarse) {
  const Grid& fg = fine.grid;
  require(fg.nx % coarse.nx == 0 && fg.ny % coarse.ny == 0, ErrorKind::Dimension,
          "fine grid is not an integer refinement of the coarse grid");
  const int rx = fg.nx / coarse.nx;
  const int ry = fg.ny / coarse.ny;
  GridField out(coarse);
  if (rx == 1 && ry == 1) {
    out.values = fine.values;
    return out;
  }
  for (int j = 0; j < coarse.ny; ++j) {
    for (int i = 0; i < coarse.nx; ++i) {
      if (rx % 2 == 1 && ry % 2 == 1) {
        // odd factors: the coarse centre is itself a fine centre
        out.at(i, j) = fine.at(i * rx + rx / 2, j * ry + ry / 2);
        continue;
      }
      // even factors: average the fine cells touching the coarse centre
      const int i0 = i * rx + (rx - 1) / 2;
      const int j0 = j * ry + (ry - 1) / 2;
      const int di = rx % 2 == 0 ? 2 : 1;
      const int dj = ry % 2 == 0 ? 2 : 1;
      double sum = 0.0;
      for (int b = 0; b < dj; ++b)
        for (int a = 0; a < di; ++a) sum += fine.at(i0 + a, j0 + b);
      out.at(i, j) = sum / (di * dj);
    }
  }
  return out;
}

}  // namespace dsmc
