#pragma once

#include "grid.hpp"
#include "permeability.hpp"
#include "rng.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <optional>

namespace dsmc::prior {

/// Whittle-Matern hyperparameters. The distance enters the Bessel function
/// as r / ell with no sqrt(2 nu) rescaling.
struct MaternParams {
  double nu = 1.5;
  double ell = 1.0;
  double sigma0_sq = 1.0;
  double mean = 5.0;

  friend bool operator==(const MaternParams&, const MaternParams&) = default;
};

void validate(const MaternParams& p);

double matern_correlation(double r, const MaternParams& p);

/// Lower Cholesky factor of the dense cell-centre covariance (plus jitter).
struct CovFactor {
  Grid grid;
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

inline constexpr int kMaxDenseCells = 10000;

/// Dense covariance, factorised with diagonal jitter starting at 1e-10 sigma0^2
/// and doubling until success or 1e-6 sigma0^2.
CovFactor build_cov_factor(const Grid& grid, const MaternParams& p);

Eigen::MatrixXd covariance_matrix(const Grid& grid, const MaternParams& p);

/// mean + L xi with xi standard normal.
GridField sample_grf(const CovFactor& factor, double mean, Rng& rng);

/// A zero-mean N(0, C) draw.
Eigen::VectorXd sample_centered(const CovFactor& factor, Rng& rng);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Uniform support of the five channel parameters.
using GeometryBounds = std::array<Interval, 5>;

GeometryBounds default_geometry_bounds();

struct PriorSpec {
  ModelKind model = ModelKind::P1;
  MaternParams field;    // P1 log-conductivity
  MaternParams inside;   // P2 u1
  MaternParams outside;  // P2 u2
  GeometryBounds bounds = default_geometry_bounds();

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// PriorSpec with its covariance factors built for one grid.
class Prior {
 public:
  Prior(PriorSpec spec, const Grid& grid);

  [[nodiscard]] const PriorSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] ModelKind model() const noexcept { return spec_.model; }

  /// Factor of the first Gaussian block (P1 field or P2 inside field).
  [[nodiscard]] const CovFactor& primary_factor() const { return *primary_; }
  /// Factor of the P2 outside field; same as primary_factor() for P1.
  [[nodiscard]] const CovFactor& outside_factor() const { return *outside_; }

  [[nodiscard]] Parameter sample(Rng& rng) const;

 private:
  PriorSpec spec_;
  Grid grid_;
  std::shared_ptr<const CovFactor> primary_;
  std::shared_ptr<const CovFactor> outside_;
};

/// Log prior density ratio of the uniform channel components: 0 when both
/// geometries lie in the support, nullopt when either does not. Gaussian
/// blocks are excluded because pcn proposals are prior-reversible. Always 0
/// for P1.
std::optional<double> prior_logdensity_ratio(const Parameter& u_new, const Parameter& u_old, const PriorSpec& spec);

}  // namespace dsmc::prior
