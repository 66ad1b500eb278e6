#include "permeability.hpp"

#include "error.hpp"

#include <cmath>

namespace dsmc {

const char* to_string(ModelKind m) { return m == ModelKind::P1 ? "p1" : "p2"; }

const Grid& Parameter::grid() const {
  if (model() == ModelKind::P1) return field().logk.grid;
  return channel().inside.grid;
}

double lower_boundary(double x1, const ChannelGeometry& geom) {
  require(std::abs(std::cos(geom.angle())) > 1e-14, ErrorKind::Domain, "channel slope angle d3 = +-pi/2 is singular");
  return geom.amplitude() * std::sin(geom.frequency() * x1 / Grid::kExtent) + std::tan(geom.angle()) * x1 +
         geom.intercept();
}

bool channel_indicator(const darcy::Point& x, const ChannelGeometry& geom) {
  const double lo = lower_boundary(x.x1, geom);
  return x.x2 >= lo && x.x2 <= lo + geom.width();
}

std::vector<bool> channel_mask(const Grid& grid, const ChannelGeometry& geom) {
  std::vector<bool> mask(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.nx; ++i) {
    const double lo = lower_boundary(grid.xc(i), geom);
    const double hi = lo + geom.width();
    for (int j = 0; j < grid.ny; ++j) {
      const double y = grid.yc(j);
      mask[grid.index(i, j)] = y >= lo && y <= hi;
    }
  }
  return mask;
}

GridField realize_permeability(const Parameter& u) {
  if (u.model() == ModelKind::P1) {
    const auto& f = u.field().logk;
    return GridField(f.grid, f.values.unaryExpr([](double v) { return std::exp(v); }));
  }
  const auto& c = u.channel();
  require(c.inside.grid == c.outside.grid, ErrorKind::Dimension, "channel fields live on different grids");
  const auto mask = channel_mask(c.inside.grid, c.geom);
  GridField kappa(c.inside.grid);
  for (int k = 0; k < kappa.grid.size(); ++k)
    kappa.values[k] = std::exp(mask[k] ? c.inside.values[k] : c.outside.values[k]);
  return kappa;
}

}  // namespace dsmc
