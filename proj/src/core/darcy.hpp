#pragma once

#include "grid.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dsmc::darcy {

/// Piecewise-constant recharge of the aquifer benchmark, a function of x2
/// only: 0 on (0, 4], 137 on (4, 5), 274 on [5, 6). The closed endpoints
/// 0 and 6 extend the first and last pieces.
double recharge(double x2);

/// Exact mean of recharge over [y0, y1].
double recharge_average(double y0, double y1);

enum class Side { Left, Right, Bottom, Top };

/// A boundary condition on one side of the square. `value` is evaluated at
/// face midpoints (x1, x2). For Inflow it is the flux entering the domain
/// per unit boundary length, i.e. kappa * dh/dn with n the outward normal.
struct SideCondition {
  enum class Type { Dirichlet, Inflow };
  Type type = Type::Inflow;
  std::function<double(double, double)> value;

  static SideCondition dirichlet(double h);
  static SideCondition inflow(double q);
};

struct BoundarySpec {
  SideCondition left, right, bottom, top;

  /// h = 100 on x2 = 0, no flow on x1 = 6 and x2 = 6, inflow 500 on x1 = 0.
  static BoundarySpec aquifer();
  [[nodiscard]] const SideCondition& at(Side s) const;
};

/// Cell-averaged source term f evaluated for cell (i, j).
using SourceFn = std::function<double(const Grid&, int, int)>;

SourceFn recharge_source();

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

enum class SolverKind { Cholesky, ConjugateGradient };

struct SolverOptions {
  SolverKind kind = SolverKind::Cholesky;
  double tolerance = 1e-10;
  int max_iterations = 20000;
};

/// Cell-centred finite-volume discretisation of -div(kappa grad h) = f with
/// harmonic averaging of kappa on interior faces. Immutable after
/// construction; solve() may be called concurrently.
class DarcyModel {
 public:
  explicit DarcyModel(Grid grid, BoundarySpec bc = BoundarySpec::aquifer(), SourceFn source = recharge_source(),
                      SolverOptions options = {});

  [[nodiscard]] LinearSystem assemble(const GridField& conductivity) const;
  [[nodiscard]] GridField solve(const GridField& conductivity) const;
  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const SolverOptions& options() const noexcept { return options_; }

 private:
  struct DirichletFace {
    int cell;
    double geometry;  // face length / centre-to-face distance
    double value;
  };

  struct Face {
    int a;
    int b;
    double geometry;  // face length / centre distance
    int pos_ab;
    int pos_ba;
  };
  struct SolverPool;

  void check_conductivity(const GridField& conductivity) const;
  void build_pattern();

  Grid grid_;
  SolverOptions options_;
  Eigen::VectorXd fixed_rhs_;  // sources and prescribed inflow
  std::vector<DirichletFace> dirichlet_;
  std::vector<Face> faces_;
  Eigen::SparseMatrix<double> pattern_;
  std::vector<int> diag_pos_;
  std::shared_ptr<SolverPool> pool_;
};

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Observation sites, Gaussian kernel width, noise level and data.
struct ObservationSet {
  std::vector<Point> locations;
  double eps = 0.0;
  double sigma = 0.0;
  Eigen::VectorXd y;
};

/// `nx` x `ny` sites on a uniform lattice strictly inside the domain.
std::vector<Point> lattice_locations(int nx, int ny);

/// Discrete smoothed point evaluation: each observation is a Gaussian-kernel
/// weighted average of cell values, truncated at 4 eps and renormalised so
/// constants are reproduced exactly. If no cell centre lies within the
/// truncation radius the nearest cell is used.
class ObservationOperator {
 public:
  ObservationOperator(const Grid& grid, std::span<const Point> locations, double eps);

  [[nodiscard]] Eigen::VectorXd observe(const GridField& pressure) const;
  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(rows_.size()); }
  [[nodiscard]] double eps() const noexcept { return eps_; }

 private:
  struct Weight {
    int cell;
    double w;
  };
  Grid grid_;
  double eps_;
  std::vector<std::vector<Weight>> rows_;
};

/// Area-weighted discrete L2 norm over the domain.
double l2_norm(const GridField& f);

}  // namespace dsmc::darcy
