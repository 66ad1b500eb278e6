#include "darcy.hpp"

#include "error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

namespace dsmc::darcy {

namespace {

constexpr double kRechargeLow = 137.0;
constexpr double kRechargeHigh = 274.0;

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

double recharge(double x2) {
  require(x2 >= 0.0 && x2 <= Grid::kExtent, ErrorKind::Domain,
          "recharge: x2 = " + std::to_string(x2) + " outside [0, 6]");
  if (x2 <= 4.0) return 0.0;
  if (x2 < 5.0) return kRechargeLow;
  return kRechargeHigh;
}

double recharge_average(double y0, double y1) {
  require(y0 >= 0.0 && y1 <= Grid::kExtent && y1 > y0, ErrorKind::Domain, "recharge_average: bad interval");
  auto overlap = [&](double a, double b) { return std::max(0.0, std::min(y1, b) - std::max(y0, a)); };
  return (kRechargeLow * overlap(4.0, 5.0) + kRechargeHigh * overlap(5.0, 6.0)) / (y1 - y0);
}

SideCondition SideCondition::dirichlet(double h) {
  return {Type::Dirichlet, [h](double, double) { return h; }};
}

SideCondition SideCondition::inflow(double q) {
  return {Type::Inflow, [q](double, double) { return q; }};
}

BoundarySpec BoundarySpec::aquifer() {
  return {SideCondition::inflow(500.0), SideCondition::inflow(0.0), SideCondition::dirichlet(100.0),
          SideCondition::inflow(0.0)};
}

const SideCondition& BoundarySpec::at(Side s) const {
  switch (s) {
    case Side::Left: return left;
    case Side::Right: return right;
    case Side::Bottom: return bottom;
    case Side::Top: return top;
  }
  return left;
}

SourceFn recharge_source() {
  return [](const Grid& g, int, int j) { return recharge_average(j * g.hy(), (j + 1) * g.hy()); };
}

DarcyModel::DarcyModel(Grid grid, BoundarySpec bc, SourceFn source, SolverOptions options)
    : grid_(grid), options_(options), fixed_rhs_(Eigen::VectorXd::Zero(grid.size())) {
  require(grid_.nx >= 2 && grid_.ny >= 2, ErrorKind::InvalidArgument, "Darcy grid needs at least 2x2 cells");
  const double hx = grid_.hx();
  const double hy = grid_.hy();
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) fixed_rhs_[grid_.index(i, j)] = source(grid_, i, j) * grid_.cell_area();

  auto add_face = [&](const SideCondition& c, int cell, double length, double distance, double x1, double x2) {
    const double v = c.value(x1, x2);
    if (c.type == SideCondition::Type::Dirichlet) {
      dirichlet_.push_back({cell, length / (0.5 * distance), v});
    } else {
      fixed_rhs_[cell] += v * length;
    }
  };
  for (int j = 0; j < grid_.ny; ++j) {
    add_face(bc.left, grid_.index(0, j), hy, hx, 0.0, grid_.yc(j));
    add_face(bc.right, grid_.index(grid_.nx - 1, j), hy, hx, Grid::kExtent, grid_.yc(j));
  }
  for (int i = 0; i < grid_.nx; ++i) {
    add_face(bc.bottom, grid_.index(i, 0), hx, hy, grid_.xc(i), 0.0);
    add_face(bc.top, grid_.index(i, grid_.ny - 1), hx, hy, grid_.xc(i), Grid::kExtent);
  }
  require(!dirichlet_.empty(), ErrorKind::InvalidArgument, "at least one side must carry a Dirichlet condition");
  build_pattern();
  pool_ = std::make_shared<SolverPool>();
}

void DarcyModel::check_conductivity(const GridField& conductivity) const {
  require(conductivity.grid == grid_, ErrorKind::Dimension, "conductivity grid does not match the model grid");
  for (Eigen::Index k = 0; k < conductivity.values.size(); ++k) {
    const double v = conductivity.values[k];
    if (!(std::isfinite(v) && v > 0.0))
      fail(ErrorKind::InvalidField,
           "conductivity must be finite and positive, cell " + std::to_string(k) + " has " + std::to_string(v));
  }
}

void DarcyModel::build_pattern() {
  const int n = grid_.size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) triplets.emplace_back(k, k, 1.0);
  const double tx = grid_.hy() / grid_.hx();
  const double ty = grid_.hx() / grid_.hy();
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      const int k = grid_.index(i, j);
      if (i + 1 < grid_.nx) faces_.push_back({k, grid_.index(i + 1, j), tx, 0, 0});
      if (j + 1 < grid_.ny) faces_.push_back({k, grid_.index(i, j + 1), ty, 0, 0});
    }
  }
  for (const auto& f : faces_) {
    triplets.emplace_back(f.a, f.b, 1.0);
    triplets.emplace_back(f.b, f.a, 1.0);
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();
  auto position = [&](int r, int c) {
    const auto* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c];
    const auto* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c + 1];
    return static_cast<int>(std::lower_bound(begin, end, r) - pattern_.innerIndexPtr());
  };
  diag_pos_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) diag_pos_[static_cast<std::size_t>(k)] = position(k, k);
  for (auto& f : faces_) {
    f.pos_ab = position(f.a, f.b);
    f.pos_ba = position(f.b, f.a);
  }
}

LinearSystem DarcyModel::assemble(const GridField& conductivity) const {
  check_conductivity(conductivity);
  const auto& kappa = conductivity.values;
  LinearSystem sys;
  sys.rhs = fixed_rhs_;
  sys.matrix = pattern_;
  double* v = sys.matrix.valuePtr();
  std::fill(v, v + sys.matrix.nonZeros(), 0.0);
  for (const auto& f : faces_) {
    const double t = harmonic(kappa[f.a], kappa[f.b]) * f.geometry;
    v[f.pos_ab] = -t;
    v[f.pos_ba] = -t;
    v[diag_pos_[static_cast<std::size_t>(f.a)]] += t;
    v[diag_pos_[static_cast<std::size_t>(f.b)]] += t;
  }
  for (const auto& f : dirichlet_) {
    const double t = kappa[f.cell] * f.geometry;
    v[diag_pos_[static_cast<std::size_t>(f.cell)]] += t;
    sys.rhs[f.cell] += t * f.value;
  }
  return sys;
}

/// Cholesky solvers sharing the symbolic analysis of the fixed pattern.
struct DarcyModel::SolverPool {
  using Llt = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;
  std::mutex mutex;
  std::vector<std::unique_ptr<Llt>> idle;
};

GridField DarcyModel::solve(const GridField& conductivity) const {
  const LinearSystem sys = assemble(conductivity);
  Eigen::VectorXd h;
  if (options_.kind == SolverKind::Cholesky) {
    std::unique_ptr<SolverPool::Llt> llt;
    {
      std::lock_guard lock(pool_->mutex);
      if (!pool_->idle.empty()) {
        llt = std::move(pool_->idle.back());
        pool_->idle.pop_back();
      }
    }
    if (!llt) {
      llt = std::make_unique<SolverPool::Llt>();
      llt->analyzePattern(sys.matrix);
    }
    llt->factorize(sys.matrix);
    const bool ok = llt->info() == Eigen::Success;
    if (ok) h = llt->solve(sys.rhs);
    {
      std::lock_guard lock(pool_->mutex);
      pool_->idle.push_back(std::move(llt));
    }
    require(ok, ErrorKind::Numerical, "sparse Cholesky factorisation failed");
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(options_.tolerance);
    cg.setMaxIterations(options_.max_iterations);
    cg.compute(sys.matrix);
    h = cg.solve(sys.rhs);
  }
  const double bnorm = sys.rhs.norm();
  const double residual = (sys.matrix * h - sys.rhs).norm() / (bnorm > 0.0 ? bnorm : 1.0);
  if (!(std::isfinite(residual) && residual <= options_.tolerance))
    fail(ErrorKind::Numerical, "pressure solve did not converge, relative residual " + std::to_string(residual));
  return GridField(grid_, std::move(h));
}

std::vector<Point> lattice_locations(int nx, int ny) {
  require(nx >= 1 && ny >= 1, ErrorKind::InvalidArgument, "observation lattice needs at least one site per axis");
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.push_back({(i + 0.5) * Grid::kExtent / nx, (j + 0.5) * Grid::kExtent / ny});
  return pts;
}

ObservationOperator::ObservationOperator(const Grid& grid, std::span<const Point> locations, double eps)
    : grid_(grid), eps_(eps) {
  require(!locations.empty(), ErrorKind::InvalidArgument, "need at least one observation location");
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "observation kernel width must be positive");
  const double cutoff2 = 16.0 * eps * eps;
  rows_.reserve(locations.size());
  for (const auto& p : locations) {
    require(p.x1 > 0.0 && p.x1 < Grid::kExtent && p.x2 > 0.0 && p.x2 < Grid::kExtent, ErrorKind::Domain,
            "observation location must lie strictly inside the domain");
    std::vector<Weight> row;
    double total = 0.0;
    int nearest = 0;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const double dx = grid.xc(i) - p.x1;
        const double dy = grid.yc(j) - p.x2;
        const double d2 = dx * dx + dy * dy;
        if (d2 < nearest_d2) {
          nearest_d2 = d2;
          nearest = grid.index(i, j);
        }
        if (d2 > cutoff2) continue;
        const double w = std::exp(-0.5 * d2 / (eps * eps));
        if (w > 0.0) {
          row.push_back({grid.index(i, j), w});
          total += w;
        }
      }
    }
    if (row.empty() || !(total > 0.0)) {
      row.assign(1, {nearest, 1.0});
    } else {
      for (auto& w : row) w.w /= total;
    }
    rows_.push_back(std::move(row));
  }
}

Eigen::VectorXd ObservationOperator::observe(const GridField& pressure) const {
  require(pressure.grid == grid_, ErrorKind::Dimension, "pressure grid does not match the observation grid");
  Eigen::VectorXd out(size());
  for (int m = 0; m < size(); ++m) {
    double s = 0.0;
    for (const auto& w : rows_[m]) s += w.w * pressure.values[w.cell];
    out[m] = s;
  }
  return out;
}

double l2_norm(const GridField& f) { return std::sqrt(f.values.squaredNorm() * f.grid.cell_area()); }

}  // namespace dsmc::darcy
