#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace oracle {

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Conjugate update of N(m0, C0) through y = A u + N(0, sigma^2 I), in information form.
GaussianPosterior linear_gaussian_posterior(const Eigen::VectorXd& m0, const Eigen::MatrixXd& C0,
                                            const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double sigma);

/// Sample mean and unbiased covariance of the columns of X.
GaussianPosterior sample_moments(const Eigen::MatrixXd& X);

/// One-sample Kolmogorov-Smirnov statistic against U[lo, hi].
double ks_uniform(std::vector<double> samples, double lo, double hi);

/// Asymptotic 1% critical value 1.628 / sqrt(n).
double ks_critical_1pct(std::size_t n);

}  // namespace oracle
