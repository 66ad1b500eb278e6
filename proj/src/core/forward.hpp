#pragma once

#include "darcy.hpp"
#include "permeability.hpp"
#include "rng.hpp"

#include <Eigen/Core>

#include <span>

namespace dsmc {

/// Parameter-to-observation map: conductivity realisation, pressure solve,
/// smoothed point observations. Thread-safe after construction.
class ForwardModel {
 public:
  ForwardModel(const Grid& grid, std::span<const darcy::Point> locations, double eps,
               darcy::SolverOptions solver = {});

  [[nodiscard]] Eigen::VectorXd predict(const Parameter& u) const;
  [[nodiscard]] GridField pressure(const Parameter& u) const;

  [[nodiscard]] const Grid& grid() const noexcept { return darcy_.grid(); }
  [[nodiscard]] const darcy::DarcyModel& darcy() const noexcept { return darcy_; }
  [[nodiscard]] const darcy::ObservationOperator& observations() const noexcept { return obs_; }
  [[nodiscard]] int num_observations() const noexcept { return obs_.size(); }

 private:
  darcy::DarcyModel darcy_;
  darcy::ObservationOperator obs_;
};

/// Synthetic data from a truth on a (fine) grid: y = G(truth) + eta with
/// eta ~ N(0, sigma^2 I) and sigma = noise_fraction * ||h_true||_L2.
/// A zero noise fraction returns noiseless data with sigma = 0.
darcy::ObservationSet synthesize_data(const Parameter& truth, std::span<const darcy::Point> locations, double eps,
                                      double noise_fraction, Rng& rng, darcy::SolverOptions solver = {});

}  // namespace dsmc
