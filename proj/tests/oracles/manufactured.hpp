#pragma once

#include <vector>

namespace oracle {

/// h = sin(pi x1 / 6) cos(pi x2 / 6) on [0, 6]^2 with kappa = 1, so -lap h = 2 (pi/6)^2 h.
double manufactured_h(double x1, double x2);

/// Exact mean of -lap h over the cell [x0, x1] x [y0, y1].
double manufactured_source_average(double x0, double x1, double y0, double y1);

struct RefinementResult {
  std::vector<int> sizes;
  std::vector<double> errors;  // area-weighted L2 error at cell centres
  std::vector<double> orders;  // log2(e_coarse / e_fine) between consecutive sizes
};

/// Solves the all-Dirichlet manufactured problem on n x n grids for each n.
RefinementResult manufactured_refinement(const std::vector<int>& sizes);

}  // namespace oracle
