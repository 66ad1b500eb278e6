#pragma once

#include "permeability.hpp"
#include "rng.hpp"

#include <Eigen/Core>

#include <vector>

namespace dsmc::resampling {

/// J indices drawn i.i.d. with probabilities w.
std::vector<int> multinomial_resample(const Eigen::VectorXd& w, Rng& rng);

/// Coordinates of a parameter: the log field for P1; (d1..d5, u1, u2) for P2.
Eigen::VectorXd flatten(const Parameter& u);

/// Inverse of flatten using `shape` for the variant and grid.
Parameter unflatten(const Eigen::VectorXd& x, const Parameter& shape);

int flat_dimension(const Parameter& shape);

/// Column j of the result is flatten(particles[j]).
Eigen::MatrixXd flatten_ensemble(const std::vector<Parameter>& particles);

/// D_ij = ||x_i - x_j||^2 for the columns x of a flattened ensemble.
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& flat);

struct TransportPlan {
  Eigen::MatrixXd coupling;  // rows: weighted source particles; columns: uniform targets
  double cost = 0.0;
  long pivots = 0;
};

/// Exact optimal coupling with row sums w and column sums 1/J for cost D,
/// solved by a primal network simplex with block pricing (ties go to the
/// lowest arc index within a block) and a strongly feasible tree.
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w);

/// x_hat_j = sum_i P_ij x_i with P = J * T, each column normalised to sum to one.
Eigen::MatrixXd transform_ensemble(const Eigen::MatrixXd& flat, const TransportPlan& plan);

}  // namespace dsmc::resampling
