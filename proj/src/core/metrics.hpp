#pragma once

#include "grid.hpp"
#include "permeability.hpp"
#include "prior.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace dsmc::metrics {

/// Cell-area-weighted L2 norm of a - b.
double mean_error(const GridField& a, const GridField& b);

struct HistogramSpec {
  int bins = 2;
  prior::Interval range;
};

inline constexpr double kBinFloor = 1e-10;

/// Bin probabilities of weighted samples on [range.lo, range.hi]; values
/// outside the range go to the end bins. Weights need not be normalised.
Eigen::VectorXd histogram(const Eigen::VectorXd& samples, const Eigen::VectorXd& weights, const HistogramSpec& spec);

/// sum_b p_ref log(p_ref / p) after adding kBinFloor to every bin and
/// renormalising.
double kl_marginal(const Eigen::VectorXd& reference, const Eigen::VectorXd& approx, const Eigen::VectorXd& weights,
                   const HistogramSpec& spec);

/// Unbiased per-cell variance of a set of fields (at least two).
GridField ensemble_variance_field(const std::vector<GridField>& fields);

GridField mean_field(const std::vector<GridField>& fields);

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

/// Number of strict local maxima after a centred 3-bin moving average
/// (end bins average their two available neighbours); plateaus count once.
int count_modes(const Eigen::VectorXd& histogram);

/// Error and KL summary of one ensemble against the reference.
struct RunMetrics {
  double error_field = 0.0;    // P1
  double error_inside = 0.0;   // P2 u1
  double error_outside = 0.0;  // P2 u2
  std::array<double, 5> kl{};  // P2 geometric marginals
};

/// Means are taken over parameters given by flattened columns (see
/// resampling::flatten); `bins` is the KL bin count.
RunMetrics compare(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Parameter& shape,
                   const prior::GeometryBounds& bounds, int bins);

}  // namespace dsmc::metrics
