#include "eki.hpp"

#include "error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace dsmc::eki {

EnsembleMoments empirical_moments(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions) {
  const Eigen::Index j = particles.cols();
  require(j >= 2, ErrorKind::InvalidArgument, "empirical moments need at least two particles");
  require(predictions.cols() == j, ErrorKind::Dimension, "particles and predictions differ in ensemble size");
  EnsembleMoments m;
  m.mean = particles.rowwise().mean();
  m.data_mean = predictions.rowwise().mean();
  const Eigen::MatrixXd du = particles.colwise() - m.mean;
  const Eigen::MatrixXd dg = predictions.colwise() - m.data_mean;
  const double scale = 1.0 / static_cast<double>(j - 1);
  m.cross_cov = scale * du * dg.transpose();
  m.data_cov = scale * dg * dg.transpose();
  return m;
}

double inflation(double phi_prev, double phi) {
  require(phi > phi_prev, ErrorKind::Contract, "inflation: phi must exceed phi_prev");
  return 1.0 / (phi - phi_prev);
}

Eigen::MatrixXd eki_transform(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& y, double alpha, double noise_variance, const NoiseSource& noise) {
  require(alpha > 0.0, ErrorKind::InvalidArgument, "eki_transform: alpha must be positive");
  require(noise_variance > 0.0, ErrorKind::InvalidArgument, "eki_transform: noise variance must be positive");
  require(predictions.rows() == y.size(), ErrorKind::Dimension, "eki_transform: data length mismatch");
  const EnsembleMoments m = empirical_moments(particles, predictions);
  Eigen::MatrixXd s = m.data_cov;
  s.diagonal().array() += alpha * noise_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  require(llt.info() == Eigen::Success, ErrorKind::Numerical, "eki_transform: C^GG + alpha Gamma is not SPD");

  const double noise_sd = std::sqrt(alpha * noise_variance);
  Eigen::MatrixXd innovations(y.size(), particles.cols());
  for (Eigen::Index j = 0; j < particles.cols(); ++j)
    innovations.col(j) = y + noise_sd * noise(j, y.size()) - predictions.col(j);
  return particles + m.cross_cov * llt.solve(innovations);
}

Eigen::MatrixXd eki_transform(const Eigen::MatrixXd& particles, const Eigen::MatrixXd& predictions,
                              const Eigen::VectorXd& y, double alpha, double noise_variance, Rng& rng) {
  return eki_transform(particles, predictions, y, alpha, noise_variance,
                       [&rng](Eigen::Index, Eigen::Index m) { return standard_normal(rng, m); });
}

void eki_project(Eigen::Ref<Eigen::VectorXd> flat_p2, const prior::GeometryBounds& bounds) {
  require(flat_p2.size() >= 5, ErrorKind::Dimension, "eki_project: not a P2 coordinate vector");
  for (int i = 0; i < 5; ++i) flat_p2[i] = std::clamp(flat_p2[i], bounds[i].lo, bounds[i].hi);
}

}  // namespace dsmc::eki
