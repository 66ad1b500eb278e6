#pragma once

#include "prior.hpp"
#include "rng.hpp"

#include <Eigen/Core>

#include <functional>

namespace dsmc::eki {

/// Ensemble mean, data mean, cross-covariance C^{uG} (K x M) and data
/// covariance C^{GG} (M x M) with the unbiased 1/(J - 1) normalisation.
/// The K x K parameter covariance is never formed.
struct EnsembleMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd data_mean;
  Eigen::MatrixXd cross_cov;
  Eigen::MatrixXd data_cov;
};

/// Columns of `particles` (K x J) and `predictions` (M x J) are particles.
EnsembleMoments empirical_moments(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions);

/// alpha = 1 / (phi - phi_prev).
double inflation(double phi_prev, double phi);

/// Supplies the standard normal vector used to perturb the data of particle j.
using NoiseSource = std::function<Eigen::VectorXd(Eigen::Index j, Eigen::Index m)>;

/// Perturbed-observation Kalman update with Gamma = sigma^2 I:
/// u_j + C^{uG} (C^{GG} + alpha Gamma)^{-1} (y + eta_j - G(u_j)),
/// eta_j ~ N(0, alpha Gamma).
Eigen::MatrixXd eki_transform(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& y, double alpha, double noise_variance, const NoiseSource& noise);

/// Same update with noise drawn sequentially from one generator.
Eigen::MatrixXd eki_transform(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& y, double alpha, double noise_variance, Rng& rng);

/// Clamps the five leading (geometry) coordinates of a flattened P2 particle
/// into their prior intervals.
void eki_project(Eigen::Ref<Eigen::VectorXd> flat_p2, const prior::GeometryBounds& bounds);

}  // namespace dsmc::eki
