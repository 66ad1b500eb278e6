#include "prior.hpp"

#include "error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <string>

namespace dsmc::prior {

void validate(const MaternParams& p) {
  require(p.nu > 0.0 && std::isfinite(p.nu), ErrorKind::InvalidArgument, "Matern smoothness nu must be positive");
  require(p.ell > 0.0 && std::isfinite(p.ell), ErrorKind::InvalidArgument, "Matern length scale must be positive");
  require(p.sigma0_sq > 0.0 && std::isfinite(p.sigma0_sq), ErrorKind::InvalidArgument,
          "Matern amplitude sigma0^2 must be positive");
  require(std::isfinite(p.mean), ErrorKind::InvalidArgument, "prior mean must be finite");
}

double matern_correlation(double r, const MaternParams& p) {
  require(r >= 0.0, ErrorKind::Domain, "matern_correlation: negative distance");
  if (r == 0.0) return p.sigma0_sq;
  const double z = r / p.ell;
  const double log_scale = (1.0 - p.nu) * std::numbers::ln2 - std::lgamma(p.nu) + p.nu * std::log(z);
  return p.sigma0_sq * std::exp(log_scale) * std::cyl_bessel_k(p.nu, z);
}

Eigen::MatrixXd covariance_matrix(const Grid& grid, const MaternParams& p) {
  validate(p);
  const int n = grid.size();
  Eigen::MatrixXd c(n, n);
  for (int a = 0; a < n; ++a) {
    const double xa = grid.xc(a % grid.nx);
    const double ya = grid.yc(a / grid.nx);
    c(a, a) = p.sigma0_sq;
    for (int b = 0; b < a; ++b) {
      const double dx = xa - grid.xc(b % grid.nx);
      const double dy = ya - grid.yc(b / grid.nx);
      c(a, b) = c(b, a) = matern_correlation(std::hypot(dx, dy), p);
    }
  }
  return c;
}

CovFactor build_cov_factor(const Grid& grid, const MaternParams& p) {
  require(grid.size() <= kMaxDenseCells, ErrorKind::InvalidArgument,
          "grid with " + std::to_string(grid.size()) + " cells exceeds the dense covariance limit of " +
              std::to_string(kMaxDenseCells));
  Eigen::MatrixXd c = covariance_matrix(grid, p);
  const double max_jitter = 1e-6 * p.sigma0_sq;
  for (double jitter = 1e-10 * p.sigma0_sq; jitter <= max_jitter * (1.0 + 1e-12); jitter *= 2.0) {
    Eigen::MatrixXd shifted = c;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) return CovFactor{grid, llt.matrixL(), jitter};
  }
  fail(ErrorKind::Numerical, "covariance Cholesky failed even with jitter " + std::to_string(max_jitter));
}

Eigen::VectorXd sample_centered(const CovFactor& factor, Rng& rng) {
  const Eigen::VectorXd xi = standard_normal(rng, factor.lower.rows());
  return factor.lower.triangularView<Eigen::Lower>() * xi;
}

GridField sample_grf(const CovFactor& factor, double mean, Rng& rng) {
  Eigen::VectorXd v = sample_centered(factor, rng);
  v.array() += mean;
  return GridField(factor.grid, std::move(v));
}

GeometryBounds default_geometry_bounds() {
  constexpr double pi = std::numbers::pi;
  return {{
      {0.05 * 6.0, 0.35 * 6.0},
      {pi / 2.0, 6.0 * pi},
      {-pi / 2.0 + 0.01, pi / 2.0 - 0.01},
      {0.0, 6.0},
      {0.02 * 6.0, 0.7 * 6.0},
  }};
}

namespace {

bool same_covariance(const MaternParams& a, const MaternParams& b) {
  return a.nu == b.nu && a.ell == b.ell && a.sigma0_sq == b.sigma0_sq;
}

}  // namespace

Prior::Prior(PriorSpec spec, const Grid& grid) : spec_(std::move(spec)), grid_(grid) {
  if (spec_.model == ModelKind::P1) {
    primary_ = std::make_shared<const CovFactor>(build_cov_factor(grid_, spec_.field));
    outside_ = primary_;
    return;
  }
  for (const auto& b : spec_.bounds)
    require(std::isfinite(b.lo) && std::isfinite(b.hi) && b.hi > b.lo, ErrorKind::InvalidArgument,
            "geometry intervals must be finite and nonempty");
  require(spec_.bounds[4].lo > 0.0, ErrorKind::InvalidArgument, "channel width interval must be positive");
  primary_ = std::make_shared<const CovFactor>(build_cov_factor(grid_, spec_.inside));
  outside_ = same_covariance(spec_.inside, spec_.outside)
                 ? primary_
                 : std::make_shared<const CovFactor>(build_cov_factor(grid_, spec_.outside));
}

Parameter Prior::sample(Rng& rng) const {
  if (spec_.model == ModelKind::P1) return FieldParameter{sample_grf(*primary_, spec_.field.mean, rng)};
  ChannelParameter c;
  for (int i = 0; i < 5; ++i)
    c.geom.d[i] = std::uniform_real_distribution<double>(spec_.bounds[i].lo, spec_.bounds[i].hi)(rng);
  c.inside = sample_grf(*primary_, spec_.inside.mean, rng);
  c.outside = sample_grf(*outside_, spec_.outside.mean, rng);
  return c;
}

std::optional<double> prior_logdensity_ratio(const Parameter& u_new, const Parameter& u_old, const PriorSpec& spec) {
  if (u_new.model() == ModelKind::P1) return 0.0;
  auto inside = [&spec](const ChannelGeometry& g) {
    for (int i = 0; i < 5; ++i)
      if (!spec.bounds[i].contains(g.d[i])) return false;
    return true;
  };
  if (!inside(u_new.channel().geom) || !inside(u_old.channel().geom)) return std::nullopt;
  return 0.0;
}

}  // namespace dsmc::prior
