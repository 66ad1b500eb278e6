#include "problem.hpp"

#include "error.hpp"

namespace dsmc {

darcy::SolverOptions solver_options(const RunConfig& cfg) {
  darcy::SolverOptions s;
  s.kind = cfg.solver;
  s.tolerance = cfg.solver_tolerance;
  return s;
}

Parameter restrict_parameter(const Parameter& u, const Grid& coarse) {
  if (u.model() == ModelKind::P1) return FieldParameter{restrict_to(u.field().logk, coarse)};
  const auto& c = u.channel();
  return ChannelParameter{c.geom, restrict_to(c.inside, coarse), restrict_to(c.outside, coarse)};
}

namespace {

Problem inference_setup(const RunConfig& cfg) {
  validate(cfg);
  Problem p;
  p.config = cfg;
  p.grid = Grid(cfg.nx, cfg.ny);
  p.truth_grid = p.grid.refined(cfg.truth_refinement);
  p.prior = std::make_shared<const prior::Prior>(cfg.prior, p.grid);
  const auto locations = darcy::lattice_locations(cfg.obs_nx, cfg.obs_ny);
  p.forward = std::make_shared<const ForwardModel>(p.grid, locations, cfg.obs_eps, solver_options(cfg));
  return p;
}

}  // namespace

Problem make_problem(const RunConfig& cfg) {
  Problem p = inference_setup(cfg);
  const prior::Prior fine_prior(cfg.prior, p.truth_grid);
  auto rng = make_stream(cfg.truth_seed, Stream::Truth);
  p.truth = fine_prior.sample(rng);
  p.truth_coarse = restrict_parameter(p.truth, p.grid);
  auto noise = make_stream(cfg.truth_seed, Stream::Noise);
  const auto locations = darcy::lattice_locations(cfg.obs_nx, cfg.obs_ny);
  p.data = synthesize_data(p.truth, locations, cfg.obs_eps, cfg.noise_fraction, noise, solver_options(cfg));
  return p;
}

Problem make_problem(const RunConfig& cfg, const darcy::ObservationSet& data) {
  Problem p = inference_setup(cfg);
  require(data.y.size() == p.forward->num_observations(), ErrorKind::Dimension,
          "data has " + std::to_string(data.y.size()) + " entries, expected " +
              std::to_string(p.forward->num_observations()));
  require(data.sigma > 0, ErrorKind::InvalidArgument, "noise standard deviation must be positive");
  p.data = data;
  return p;
}

}  // namespace dsmc
