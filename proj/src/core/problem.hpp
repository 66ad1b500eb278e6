#pragma once

#include "config.hpp"
#include "forward.hpp"
#include "prior.hpp"

#include <memory>

namespace dsmc {

/// Synthetic inverse problem: a truth drawn from the prior on a refined grid,
/// noisy smoothed observations of its pressure, and the coarse-grid forward
/// model and prior used for inference.
struct Problem {
  RunConfig config;
  Grid grid;
  Grid truth_grid;
  Parameter truth;
  Parameter truth_coarse;
  darcy::ObservationSet data;
  std::shared_ptr<const prior::Prior> prior;
  std::shared_ptr<const ForwardModel> forward;
};

darcy::SolverOptions solver_options(const RunConfig& cfg);

/// Builds the problem from the truth seed. Deterministic in the configuration.
Problem make_problem(const RunConfig& cfg);

/// Same inference setup with caller-provided data (no truth).
Problem make_problem(const RunConfig& cfg, const darcy::ObservationSet& data);

/// Field-wise restriction of a parameter to a coarser grid.
Parameter restrict_parameter(const Parameter& u, const Grid& coarse);

}  // namespace dsmc
