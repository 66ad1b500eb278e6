#include "forward.hpp"

#include "error.hpp"

namespace dsmc {

ForwardModel::ForwardModel(const Grid& grid, std::span<const darcy::Point> locations, double eps,
                           darcy::SolverOptions solver)
    : darcy_(grid, darcy::BoundarySpec::aquifer(), darcy::recharge_source(), solver), obs_(grid, locations, eps) {}

GridField ForwardModel::pressure(const Parameter& u) const {
  require(u.grid() == grid(), ErrorKind::Dimension, "parameter grid does not match the forward model grid");
  return darcy_.solve(realize_permeability(u));
}

Eigen::VectorXd ForwardModel::predict(const Parameter& u) const { return obs_.observe(pressure(u)); }

darcy::ObservationSet synthesize_data(const Parameter& truth, std::span<const darcy::Point> locations, double eps,
                                      double noise_fraction, Rng& rng, darcy::SolverOptions solver) {
  require(noise_fraction >= 0.0 && std::isfinite(noise_fraction), ErrorKind::Config,
          "noise fraction must be nonnegative");
  const ForwardModel model(truth.grid(), locations, eps, solver);
  const GridField h = model.pressure(truth);
  darcy::ObservationSet obs;
  obs.locations.assign(locations.begin(), locations.end());
  obs.eps = eps;
  obs.sigma = noise_fraction * darcy::l2_norm(h);
  obs.y = model.observations().observe(h);
  if (obs.sigma > 0.0) obs.y += obs.sigma * standard_normal(rng, obs.y.size());
  return obs;
}

}  // namespace dsmc
