#include "manufactured.hpp"

#include "darcy.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

namespace {
constexpr double kw = std::numbers::pi / 6.0;
}

double manufactured_h(double x1, double x2) { return std::sin(kw * x1) * std::cos(kw * x2); }

double manufactured_source_average(double x0, double x1, double y0, double y1) {
  // integral of sin(kw x) = (cos(kw x0) - cos(kw x1)) / kw; of cos(kw y) = (sin(kw y1) - sin(kw y0)) / kw
  const double ix = (std::cos(kw * x0) - std::cos(kw * x1)) / kw;
  const double iy = (std::sin(kw * y1) - std::sin(kw * y0)) / kw;
  return 2.0 * kw * kw * ix * iy / ((x1 - x0) * (y1 - y0));
}

RefinementResult manufactured_refinement(const std::vector<int>& sizes) {
  using namespace dsmc;
  RefinementResult out;
  const darcy::SideCondition exact{darcy::SideCondition::Type::Dirichlet, manufactured_h};
  const darcy::BoundarySpec bc{exact, exact, exact, exact};
  for (int n : sizes) {
    const Grid g(n, n);
    darcy::SourceFn source = [](const Grid& grid, int i, int j) {
      return manufactured_source_average(i * grid.hx(), (i + 1) * grid.hx(), j * grid.hy(), (j + 1) * grid.hy());
    };
    const darcy::DarcyModel model(g, bc, source);
    const GridField h = model.solve(GridField(g, 1.0));
    double sq = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double d = h.at(i, j) - manufactured_h(g.xc(i), g.yc(j));
        sq += d * d * g.cell_area();
      }
    out.sizes.push_back(n);
    out.errors.push_back(std::sqrt(sq));
  }
  for (std::size_t k = 1; k < out.errors.size(); ++k)
    out.orders.push_back(std::log(out.errors[k - 1] / out.errors[k]) /
                         std::log(static_cast<double>(out.sizes[k]) / out.sizes[k - 1]));
  return out;
}

}  // namespace oracle
