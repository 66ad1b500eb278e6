#include "bayes.hpp"

#include "error.hpp"

#include <cmath>
#include <string>

namespace dsmc::bayes {

double misfit(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions, double sigma) {
  require(y.size() == predictions.size(), ErrorKind::Dimension,
          "misfit: " + std::to_string(predictions.size()) + " predictions for " + std::to_string(y.size()) +
              " observations");
  require(sigma > 0.0, ErrorKind::InvalidArgument, "misfit: noise level must be positive");
  return (y - predictions).squaredNorm() / (2.0 * sigma * sigma);
}

Eigen::VectorXd tempered_weights(const Eigen::VectorXd& misfits, double phi_prev, double phi) {
  require(phi >= phi_prev, ErrorKind::Contract, "tempered_weights: phi < phi_prev");
  require(misfits.size() > 0, ErrorKind::InvalidArgument, "tempered_weights: empty ensemble");
  const double dphi = phi - phi_prev;
  Eigen::VectorXd logw = -dphi * misfits;
  logw.array() -= logw.maxCoeff();
  Eigen::VectorXd w = logw.array().exp().matrix();
  return w / w.sum();
}

double log_increment(const Eigen::VectorXd& misfits, double phi_prev, double phi) {
  const double dphi = phi - phi_prev;
  const Eigen::VectorXd logw = -dphi * misfits;
  const double top = logw.maxCoeff();
  return top + std::log((logw.array() - top).exp().sum()) - std::log(static_cast<double>(misfits.size()));
}

double ess(const Eigen::VectorXd& weights) { return 1.0 / weights.squaredNorm(); }

TemperingStep next_temperature(const Eigen::VectorXd& misfits, double phi_prev, double j_thresh,
                               BisectionOptions options) {
  require(phi_prev >= 0.0 && phi_prev < 1.0, ErrorKind::Contract, "next_temperature: phi_prev must be in [0, 1)");
  require(j_thresh >= 1.0 && j_thresh <= static_cast<double>(misfits.size()), ErrorKind::Contract,
          "next_temperature: threshold must lie in [1, J]");
  TemperingStep step;
  step.weights = tempered_weights(misfits, phi_prev, 1.0);
  step.ess = ess(step.weights);
  if (step.ess > j_thresh) return step;

  double lo = phi_prev;
  double hi = 1.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    Eigen::VectorXd w = tempered_weights(misfits, phi_prev, mid);
    const double e = ess(w);
    step = {mid, std::move(w), e, it};
    if (std::abs(e - j_thresh) <= options.tolerance * j_thresh) break;
    if (e > j_thresh) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return step;
}

}  // namespace dsmc::bayes
