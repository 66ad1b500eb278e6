#include <doctest.h>

#include "error.hpp"
#include "gaussian.hpp"
#include "permeability.hpp"
#include "prior.hpp"
#include "rng.hpp"

#include <cmath>
#include <numbers>

using namespace dsmc;

namespace {

ChannelGeometry band(double d4, double d5) { return {{0.0, 1.0, 0.0, d4, d5}}; }

}  // namespace

TEST_SUITE("permeability") {

TEST_CASE("lower boundary formula") {
  for (double d2 : {0.5, 2.0, 17.0}) CHECK(lower_boundary(3.0, {{0.0, d2, 0.0, 2.0, 1.0}}) == 2.0);
  CHECK(lower_boundary(1.0, {{1.0, 3.0 * std::numbers::pi, 0.0, 2.0, 1.0}}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(lower_boundary(0.0, {{1.7, 4.0, 0.9, 2.5, 1.0}}) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(lower_boundary(2.0, {{0.0, 1.0, std::atan(0.5), 1.0, 1.0}}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(lower_boundary(1.0, {{0.0, 1.0, std::numbers::pi / 2.0, 1.0, 1.0}}), Error);
}

TEST_CASE("closed band membership") {
  const auto g = band(2.0, 1.0);
  CHECK(channel_indicator({3.0, 2.5}, g));
  CHECK_FALSE(channel_indicator({3.0, 3.5}, g));
  CHECK(channel_indicator({3.0, 2.0}, g));
  CHECK(channel_indicator({3.0, 3.0}, g));
  CHECK_FALSE(channel_indicator({3.0, 1.999}, g));
}

TEST_CASE("mask agrees with the pointwise indicator") {
  const Grid grid(12, 12);
  const ChannelGeometry g{{1.2, 9.0, 0.3, 1.5, 1.4}};
  const auto mask = channel_mask(grid, g);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      CHECK(mask[static_cast<std::size_t>(grid.index(i, j))] == channel_indicator({grid.xc(i), grid.yc(j)}, g));
}

TEST_CASE("realisations") {
  const Grid grid(6, 6);
  CHECK((realize_permeability(FieldParameter{GridField(grid, 0.0)}).values.array() == 1.0).all());

  const ChannelParameter c{band(2.0, 1.0), GridField(grid, std::log(100.0)), GridField(grid, std::log(15.0))};
  const auto k = realize_permeability(c);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const bool in = grid.yc(j) >= 2.0 && grid.yc(j) <= 3.0;
      CHECK(k.at(i, j) == doctest::Approx(in ? 100.0 : 15.0).epsilon(1e-12));
    }

  auto rng = make_stream(3, Stream::Truth);
  const GridField u(grid, standard_normal(rng, grid.size()));
  const auto p2 = realize_permeability(ChannelParameter{{{1.0, 5.0, 0.2, 3.0, 1.0}}, u, u});
  CHECK(p2.values == realize_permeability(FieldParameter{u}).values);
}

TEST_CASE("realisation is positive and monotone") {
  const Grid grid(8, 8);
  auto rng = make_stream(4, Stream::Truth);
  ChannelParameter c{{{1.0, 5.0, 0.2, 3.0, 1.0}}, GridField(grid, standard_normal(rng, grid.size())),
                     GridField(grid, standard_normal(rng, grid.size()))};
  const auto base = realize_permeability(c);
  CHECK((base.values.array() > 0.0).all());
  for (int k = 0; k < grid.size(); k += 7) {
    auto up = c;
    up.inside.values[k] += 0.5;
    up.outside.values[k] += 0.5;
    CHECK((realize_permeability(up).values.array() >= base.values.array()).all());
  }
}

}  // TEST_SUITE

TEST_SUITE("prior") {

TEST_CASE("matern special cases") {
  prior::MaternParams p{0.5, 1.3, 2.0, 0.0};
  CHECK(prior::matern_correlation(0.0, p) == 2.0);
  for (double r : {0.1, 0.7, 1.3, 4.0}) CHECK(prior::matern_correlation(r, p) == doctest::Approx(2.0 * std::exp(-r / 1.3)).epsilon(1e-10));
  // nu = 3/2: (1 + r/l) exp(-r/l) with r/l entering K_nu unscaled.
  p = {1.5, 1.0, 1.0, 0.0};
  CHECK(prior::matern_correlation(1.0, p) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-10));
  for (double r : {0.3, 2.5}) CHECK(prior::matern_correlation(r, p) == doctest::Approx((1.0 + r) * std::exp(-r)).epsilon(1e-10));
  p = {2.5, 0.8, 1.0, 0.0};
  for (double r : {0.2, 1.0, 3.0}) {
    const double z = r / 0.8;
    CHECK(prior::matern_correlation(r, p) == doctest::Approx((1.0 + z + z * z / 3.0) * std::exp(-z)).epsilon(1e-10));
  }
}

TEST_CASE("matern is bounded and nonincreasing") {
  for (double nu : {0.5, 1.0, 1.5, 2.5, 4.0}) {
    const prior::MaternParams p{nu, 0.9, 1.7, 0.0};
    double prev = prior::matern_correlation(0.0, p);
    for (double r = 0.01; r < 12.0; r += 0.01) {
      const double c = prior::matern_correlation(r, p);
      CHECK(c > 0.0);
      CHECK(c <= 1.7);
      CHECK(c <= prev);
      prev = c;
    }
  }
  CHECK_THROWS(prior::matern_correlation(-1.0, prior::MaternParams{}));
}

TEST_CASE("covariance factors") {
  const prior::MaternParams p{1.5, 1.0, 2.25, 0.0};
  const auto f1 = prior::build_cov_factor(Grid(1, 1), p);
  CHECK(f1.lower(0, 0) == doctest::Approx(1.5).epsilon(1e-9));

  const Grid g(5, 4);
  const auto f = prior::build_cov_factor(g, p);
  const Eigen::MatrixXd C = f.lower * f.lower.transpose();
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(C(k, k) - (2.25 + f.jitter)) < 1e-10);
  CHECK(f.jitter >= 0.0);
  CHECK(f.jitter <= 1e-6 * 2.25);

  const Grid two(2, 1);
  const auto f2 = prior::build_cov_factor(two, p);
  const Eigen::MatrixXd C2 = f2.lower * f2.lower.transpose();
  CHECK(C2(0, 1) == doctest::Approx(prior::matern_correlation(3.0, p)).epsilon(1e-12));
  CHECK_THROWS(prior::build_cov_factor(Grid(101, 100), p));
}

TEST_CASE("grf sample moments") {
  const Grid g(5, 5);
  const prior::MaternParams p{1.5, 1.0, 1.0, 5.0};
  const auto f = prior::build_cov_factor(g, p);
  const auto C = prior::covariance_matrix(g, p);
  auto rng = make_stream(21, Stream::Truth);
  const int n = 10000;
  Eigen::MatrixXd X(g.size(), n);
  for (int s = 0; s < n; ++s) X.col(s) = prior::sample_grf(f, 5.0, rng).values;
  const auto m = oracle::sample_moments(X);
  CHECK((m.cov - C).norm() / C.norm() < 0.10);
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(m.mean[k] - 5.0) < 3.0 * std::sqrt(C(k, k) / n));
}

TEST_CASE("grf degenerate amplitude and reproducibility") {
  const Grid g(4, 4);
  const auto f = prior::build_cov_factor(g, {1.5, 1.0, 1e-20, 0.0});
  auto rng = make_stream(1, Stream::Truth);
  CHECK((prior::sample_grf(f, 2.0, rng).values.array() - 2.0).abs().maxCoeff() < 1e-8);

  const auto f1 = prior::build_cov_factor(g, {});
  auto a = make_stream(8, Stream::Truth);
  auto b = make_stream(8, Stream::Truth);
  CHECK(prior::sample_grf(f1, 5.0, a).values == prior::sample_grf(f1, 5.0, b).values);
}

TEST_CASE("prior draws") {
  const Grid g(4, 4);
  prior::PriorSpec spec;
  spec.model = ModelKind::P1;
  const prior::Prior p1(spec, g);
  auto rng = make_stream(5, Stream::Init);
  CHECK(p1.sample(rng).field().logk.values.size() == 16);

  spec.model = ModelKind::P2;
  const prior::Prior p2(spec, g);
  const int n = 10000;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto u = p2.sample(rng);
    for (int i = 0; i < 5; ++i) CHECK(spec.bounds[static_cast<std::size_t>(i)].contains(u.channel().geom.d[static_cast<std::size_t>(i)]));
    sum += u.channel().geom.intercept();
  }
  const double stderr_d4 = 6.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - 3.0) < 3.0 * stderr_d4);
}

TEST_CASE("uniform log density ratio") {
  const Grid g(2, 2);
  prior::PriorSpec spec;
  spec.model = ModelKind::P2;
  const ChannelParameter in{{{1.0, 5.0, 0.0, 3.0, 1.0}}, GridField(g), GridField(g)};
  auto out = in;
  out.geom.d[0] = 0.1;
  CHECK(prior::prior_logdensity_ratio(in, in, spec) == 0.0);
  CHECK_FALSE(prior::prior_logdensity_ratio(out, in, spec).has_value());
  const FieldParameter f{GridField(g, 1.0)};
  CHECK(prior::prior_logdensity_ratio(f, f, prior::PriorSpec{}) == 0.0);
}

TEST_CASE("default geometric intervals") {
  const auto b = prior::default_geometry_bounds();
  constexpr double pi = std::numbers::pi;
  CHECK(b[0].lo == doctest::Approx(0.3));
  CHECK(b[0].hi == doctest::Approx(2.1));
  CHECK(b[1].lo == doctest::Approx(pi / 2));
  CHECK(b[1].hi == doctest::Approx(6 * pi));
  CHECK(b[2].lo == doctest::Approx(-pi / 2 + 0.01));
  CHECK(b[3].hi == 6.0);
  CHECK(b[4].lo == doctest::Approx(0.12));
  CHECK(b[4].hi == doctest::Approx(4.2));
}

}  // TEST_SUITE
