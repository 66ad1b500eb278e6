#pragma once

#include "mutation.hpp"
#include "prior.hpp"

#include <Eigen/Core>

#include <memory>

/// Two-cell P1 problem with a linear forward map, Gaussian prior and analytic posterior.
struct LinearToy {
  dsmc::Grid grid{2, 1};
  std::shared_ptr<dsmc::prior::Prior> prior;
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  double sigma = 0.5;

  LinearToy() {
    dsmc::prior::PriorSpec spec;
    spec.model = dsmc::ModelKind::P1;
    spec.field = {1.5, 2.0, 1.0, 0.5};
    prior = std::make_shared<dsmc::prior::Prior>(spec, grid);
    A = (Eigen::MatrixXd(2, 2) << 1.0, 0.5, -0.3, 1.2).finished();
    y = Eigen::Vector2d(1.1, -0.4);
  }

  [[nodiscard]] dsmc::mutation::Target target(double phi) const {
    dsmc::mutation::Target t;
    const Eigen::MatrixXd M = A;
    t.forward = [M](const dsmc::Parameter& u) -> Eigen::VectorXd { return M * u.field().logk.values; };
    t.prior = prior.get();
    t.y = &y;
    t.sigma = sigma;
    t.phi = phi;
    return t;
  }

  [[nodiscard]] Eigen::VectorXd prior_mean() const { return Eigen::VectorXd::Constant(2, 0.5); }
  [[nodiscard]] Eigen::MatrixXd prior_cov() const {
    return prior->primary_factor().lower * prior->primary_factor().lower.transpose();
  }
};
