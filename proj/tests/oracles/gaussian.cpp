#include "gaussian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace oracle {

GaussianPosterior linear_gaussian_posterior(const Eigen::VectorXd& m0, const Eigen::MatrixXd& C0,
                                            const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double sigma) {
  const Eigen::MatrixXd P0 = C0.inverse();
  const Eigen::MatrixXd precision = P0 + A.transpose() * A / (sigma * sigma);
  GaussianPosterior post;
  post.cov = precision.inverse();
  post.mean = post.cov * (P0 * m0 + A.transpose() * y / (sigma * sigma));
  return post;
}

GaussianPosterior sample_moments(const Eigen::MatrixXd& X) {
  GaussianPosterior m;
  m.mean = X.rowwise().mean();
  const Eigen::MatrixXd centred = X.colwise() - m.mean;
  m.cov = centred * centred.transpose() / static_cast<double>(X.cols() - 1);
  return m;
}

double ks_uniform(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
