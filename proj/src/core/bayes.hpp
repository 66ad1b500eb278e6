#pragma once

#include <Eigen/Core>

namespace dsmc::bayes {

/// Phi = ||y - G(u)||^2 / (2 sigma^2), with the predictions supplied by the caller.
double misfit(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions, double sigma);

/// Normalised importance weights proportional to exp(-(phi - phi_prev) * misfit),
/// evaluated in log space with the maximum subtracted.
Eigen::VectorXd tempered_weights(const Eigen::VectorXd& misfits, double phi_prev, double phi);

/// log of (1/J) sum_j exp(-(phi - phi_prev) misfit_j), the incremental normaliser.
double log_increment(const Eigen::VectorXd& misfits, double phi_prev, double phi);

double ess(const Eigen::VectorXd& weights);

struct TemperingStep {
  double phi = 1.0;
  Eigen::VectorXd weights;
  double ess = 0.0;
  int bisection_iterations = 0;
};

struct BisectionOptions {
  double tolerance = 0.01;  // relative to j_thresh
  int max_iterations = 50;
};

/// Next tempering parameter: 1 when ESS(1) > j_thresh, otherwise bisection on
/// (phi_prev, 1] until |ESS - j_thresh| <= tolerance * j_thresh.
TemperingStep next_temperature(const Eigen::VectorXd& misfits, double phi_prev, double j_thresh,
                               BisectionOptions options = {});

}  // namespace dsmc::bayes
