#include <doctest.h>

#include "error.hpp"
#include "gaussian.hpp"
#include "mutation.hpp"
#include "rng.hpp"
#include "toy.hpp"

#include <cmath>

using namespace dsmc;

namespace {

struct ChannelToy {
  Grid grid{3, 3};
  std::shared_ptr<prior::Prior> prior;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(1);

  ChannelToy() {
    prior::PriorSpec spec;
    spec.model = ModelKind::P2;
    spec.inside.mean = std::log(100.0);
    spec.outside.mean = std::log(15.0);
    prior = std::make_shared<prior::Prior>(spec, grid);
  }

  [[nodiscard]] mutation::Target target(double phi) const {
    mutation::Target t;
    t.forward = [](const Parameter& u) -> Eigen::VectorXd {
      return Eigen::VectorXd::Constant(1, u.channel().geom.d[1] + u.channel().inside.values.sum());
    };
    t.prior = prior.get();
    t.y = &y;
    t.sigma = 1.0;
    t.phi = phi;
    return t;
  }
};

}  // namespace

TEST_SUITE("mutation") {

TEST_CASE("acceptance probability") {
  CHECK(mutation::acceptance_probability(0.0, 10.0, 1.0) == 1.0);
  CHECK(mutation::acceptance_probability(0.7, 3.0, 3.0) == 1.0);
  CHECK(mutation::acceptance_probability(1.0, 1.0, 2.0) == 1.0);
  CHECK(mutation::acceptance_probability(0.5, 3.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  auto rng = make_stream(1, Stream::Mutation);
  for (int k = 0; k < 1000; ++k) {
    const auto m = standard_normal(rng, 3);
    const double a = mutation::acceptance_probability(std::abs(m[0]), m[1] * 50, m[2] * 50);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    if (m[1] <= m[2]) CHECK(a == 1.0);
  }
}

TEST_CASE("reflection") {
  CHECK(mutation::reflect(6.4, 0.0, 6.0) == doctest::Approx(5.6).epsilon(1e-14));
  CHECK(mutation::reflect(-0.5, 0.0, 6.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mutation::reflect(3.0, 0.0, 6.0) == 3.0);
  CHECK(mutation::reflect(13.0, 0.0, 6.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mutation::reflect(-7.0, 0.0, 6.0) == doctest::Approx(5.0).epsilon(1e-14));
  // one fold is the mirror image x -> 2 b - x, an involution
  for (double d = 0.05; d < 2.0; d += 0.05) {
    const double up = mutation::reflect(2.0 + d, -1.0, 2.0);
    CHECK(up == doctest::Approx(2.0 - d).epsilon(1e-13));
    CHECK(2.0 * 2.0 - up == doctest::Approx(2.0 + d).epsilon(1e-13));
    const double down = mutation::reflect(-1.0 - d, -1.0, 2.0);
    CHECK(down == doctest::Approx(-1.0 + d).epsilon(1e-13));
  }
}

TEST_CASE("beta one proposes an independent prior draw") {
  const LinearToy toy;
  const Eigen::VectorXd v = Eigen::Vector2d(10.0, -7.0);
  auto a = make_stream(2, Stream::Mutation);
  auto b = make_stream(2, Stream::Mutation);
  const auto prop = mutation::pcn_proposal(v, 0.5, 1.0, toy.prior->primary_factor(), a);
  const Eigen::VectorXd draw = prior::sample_centered(toy.prior->primary_factor(), b).array() + 0.5;
  CHECK((prop - draw).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phi zero always accepts") {
  const LinearToy toy;
  const auto t = toy.target(0.0);
  auto rng = make_stream(3, Stream::Mutation);
  auto s = mutation::evaluate(t, toy.prior->sample(rng));
  mutation::KernelConfig cfg;
  cfg.n_mu = 200;
  mutation::AcceptanceStats stats;
  mutation::mutate(s, t, cfg, rng, stats);
  CHECK(stats.proposed[0] == 200);
  CHECK(stats.accepted[0] == 200);
  CHECK(s.predictions == t.forward(s.u));

  const ChannelToy ch;
  const auto tc = ch.target(0.0);
  auto sc = mutation::evaluate(tc, ch.prior->sample(rng));
  mutation::AcceptanceStats cs;
  cfg.n_mu = 50;
  mutation::mutate(sc, tc, cfg, rng, cs);
  for (int b = 0; b < 3; ++b) {
    CHECK(cs.proposed[static_cast<std::size_t>(b)] == 50);
    CHECK(cs.accepted[static_cast<std::size_t>(b)] == 50);
  }
}

TEST_CASE("zero geometric step leaves the geometry and accepts") {
  const ChannelToy ch;
  const auto t = ch.target(1.0);
  auto rng = make_stream(4, Stream::Mutation);
  auto s = mutation::evaluate(t, ch.prior->sample(rng));
  const auto geom = s.u.channel().geom;
  mutation::KernelConfig cfg;
  cfg.geom_step.fill(0.0);
  const auto acc = mutation::mwg_step(s, t, cfg, rng);
  CHECK(acc[0]);
  CHECK(s.u.channel().geom == geom);
}

TEST_CASE("geometry stays in its intervals") {
  const ChannelToy ch;
  const auto t = ch.target(0.0);
  auto rng = make_stream(5, Stream::Mutation);
  auto s = mutation::evaluate(t, ch.prior->sample(rng));
  mutation::KernelConfig cfg;
  cfg.geom_step.fill(0.9);
  cfg.n_mu = 1;
  mutation::AcceptanceStats stats;
  for (int k = 0; k < 500; ++k) {
    mutation::mutate(s, t, cfg, rng, stats);
    for (int i = 0; i < 5; ++i)
      CHECK(ch.prior->spec().bounds[static_cast<std::size_t>(i)].contains(s.u.channel().geom.d[static_cast<std::size_t>(i)]));
  }
}

TEST_CASE("n_mu") {
  const LinearToy toy;
  const auto t = toy.target(1.0);
  auto rng = make_stream(6, Stream::Mutation);
  auto s = mutation::evaluate(t, toy.prior->sample(rng));
  mutation::KernelConfig cfg;
  CHECK(cfg.n_mu == 10);
  cfg.n_mu = 1;
  mutation::AcceptanceStats stats;
  mutation::mutate(s, t, cfg, rng, stats);
  CHECK(stats.proposed[0] == 1);
  cfg.n_mu = 0;
  CHECK_THROWS_AS(mutation::validate(cfg), Error);
  CHECK_THROWS_AS(mutation::mutate(s, t, cfg, rng, stats), Error);
}

TEST_CASE("identical streams give identical chains") {
  const LinearToy toy;
  const auto t = toy.target(1.0);
  auto r0 = make_stream(7, Stream::Init);
  const auto start = mutation::evaluate(t, toy.prior->sample(r0));
  auto a = start;
  auto b = start;
  auto ra = make_stream(7, Stream::Mutation, {1, 2});
  auto rb = make_stream(7, Stream::Mutation, {1, 2});
  mutation::AcceptanceStats sa, sb;
  mutation::mutate(a, t, {}, ra, sa);
  mutation::mutate(b, t, {}, rb, sb);
  CHECK(a.u.field().logk.values == b.u.field().logk.values);
  CHECK(sa.accepted == sb.accepted);
}

TEST_CASE("tuning window") {
  const mutation::KernelConfig cfg;
  auto stats_at = [](double rate) {
    mutation::AcceptanceStats s;
    for (int b = 0; b < 3; ++b) {
      s.proposed[static_cast<std::size_t>(b)] = 1000;
      s.accepted[static_cast<std::size_t>(b)] = static_cast<long>(rate * 1000);
    }
    return s;
  };
  CHECK(mutation::tune_acceptance(stats_at(0.25), cfg, ModelKind::P1) == cfg);
  CHECK(mutation::tune_acceptance(stats_at(0.05), cfg, ModelKind::P1).beta == doctest::Approx(0.2 * 0.8));
  CHECK(mutation::tune_acceptance(stats_at(0.9), cfg, ModelKind::P1).beta == doctest::Approx(0.2 * 1.25));
  const auto p2 = mutation::tune_acceptance(stats_at(0.05), cfg, ModelKind::P2);
  CHECK(p2.beta_outside == doctest::Approx(0.16));
  CHECK(p2.geom_step[3] == doctest::Approx(0.04));
  auto high = cfg;
  high.beta = 0.95;
  CHECK(mutation::tune_acceptance(stats_at(0.9), high, ModelKind::P1).beta == 1.0);
  CHECK_THROWS_AS(mutation::tune_acceptance(mutation::AcceptanceStats{}, cfg, ModelKind::P1), Error);
}

TEST_CASE("pcn at phi one targets the linear-Gaussian posterior") {
  const LinearToy toy;
  const auto t = toy.target(1.0);
  const auto post = oracle::linear_gaussian_posterior(toy.prior_mean(), toy.prior_cov(), toy.A, toy.y, toy.sigma);
  const int chains = 4000;
  mutation::KernelConfig cfg;
  cfg.beta = 0.5;
  cfg.n_mu = 60;
  Eigen::MatrixXd X(2, chains);
  for (int c = 0; c < chains; ++c) {
    auto rng = make_stream(8, Stream::Mutation, {static_cast<std::uint64_t>(c)});
    auto s = mutation::evaluate(t, toy.prior->sample(rng));
    mutation::AcceptanceStats stats;
    mutation::mutate(s, t, cfg, rng, stats);
    X.col(c) = s.u.field().logk.values;
  }
  const auto m = oracle::sample_moments(X);
  for (int k = 0; k < 2; ++k) {
    const double var = post.cov(k, k);
    CHECK(std::abs(m.mean[k] - post.mean[k]) < 3.0 * std::sqrt(var / chains));
    CHECK(std::abs(m.cov(k, k) - var) < 3.0 * var * std::sqrt(2.0 / (chains - 1)));
  }
}

}  // TEST_SUITE
