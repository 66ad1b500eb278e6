#include <doctest.h>

#include "error.hpp"
#include "lp_oracle.hpp"
#include "resampling.hpp"
#include "rng.hpp"

#include <cmath>

using namespace dsmc;

namespace {

Eigen::VectorXd random_weights(Rng& rng, int J) {
  Eigen::VectorXd w = (standard_normal(rng, J).array() * 1.5).exp();
  return w / w.sum();
}

Eigen::MatrixXd random_particles(Rng& rng, int K, int J) {
  Eigen::MatrixXd X(K, J);
  for (int j = 0; j < J; ++j) X.col(j) = standard_normal(rng, K);
  return X;
}

}  // namespace

TEST_SUITE("resampling") {

TEST_CASE("multinomial forced and reproducible") {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(7);
  w[0] = 1.0;
  auto rng = make_stream(1, Stream::Transition);
  for (int i : resampling::multinomial_resample(w, rng)) CHECK(i == 0);

  const auto u = random_weights(rng, 20);
  auto a = make_stream(2, Stream::Transition);
  auto b = make_stream(2, Stream::Transition);
  CHECK(resampling::multinomial_resample(u, a) == resampling::multinomial_resample(u, b));
}

TEST_CASE("multinomial counts match the weights") {
  const int J = 1000;
  const int reps = 10000;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(J, 1.0 / J);
  auto rng = make_stream(3, Stream::Transition);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(J);
  for (int r = 0; r < reps; ++r)
    for (int i : resampling::multinomial_resample(w, rng)) counts[i] += 1.0;
  const double stderr_count = std::sqrt(J * (1.0 / J) * (1.0 - 1.0 / J) / reps);
  for (int j : {0, 1, 250, 499, 500, 998, 999}) CHECK(std::abs(counts[j] / reps - 1.0) < 3.0 * stderr_count);
  CHECK(counts.sum() == static_cast<double>(J) * reps);
}

TEST_CASE("resampled mean is unbiased for the weighted mean") {
  const int J = 50;
  const int reps = 4000;
  auto rng = make_stream(4, Stream::Transition);
  const auto w = random_weights(rng, J);
  const Eigen::VectorXd x = standard_normal(rng, J);
  const double mean = w.dot(x);
  const double var = w.dot((x.array() - mean).square().matrix());
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    double s = 0.0;
    for (int i : resampling::multinomial_resample(w, rng)) s += x[i];
    acc += s / J;
  }
  CHECK(std::abs(acc / reps - mean) < 3.0 * std::sqrt(var / J / reps));
}

TEST_CASE("flatten lengths and round trip") {
  const Grid g(2, 2);
  const Parameter p1 = FieldParameter{GridField(g, 1.5)};
  CHECK(resampling::flatten(p1).size() == 4);
  auto rng = make_stream(5, Stream::Init);
  const Parameter p2 = ChannelParameter{{{0.5, 2.0, 0.1, 3.0, 1.0}}, GridField(g, standard_normal(rng, 4)),
                                        GridField(g, standard_normal(rng, 4))};
  const auto x = resampling::flatten(p2);
  CHECK(x.size() == 13);
  CHECK(resampling::flat_dimension(p2) == 13);
  CHECK(x[3] == 3.0);
  CHECK(x.segment(5, 4) == p2.channel().inside.values);
  CHECK(resampling::flatten(resampling::unflatten(x, p2)) == x);
  CHECK(resampling::flatten(resampling::unflatten(resampling::flatten(p1), p1)) == resampling::flatten(p1));
  CHECK_THROWS_AS(resampling::unflatten(Eigen::VectorXd::Zero(5), p2), Error);
}

TEST_CASE("cost matrix") {
  const Eigen::MatrixXd X = (Eigen::MatrixXd(2, 3) << 0, 3, 0, 0, 4, 1).finished();
  const auto D = resampling::cost_matrix(X);
  CHECK(D(0, 1) == 25.0);
  CHECK(D(1, 0) == 25.0);
  CHECK(D(0, 2) == 1.0);
  CHECK(D(2, 2) == 0.0);
}

TEST_CASE("uniform weights give the identity coupling") {
  auto rng = make_stream(6, Stream::Transition);
  const int J = 9;
  const auto X = random_particles(rng, 3, J);
  const auto plan = resampling::solve_transport(resampling::cost_matrix(X), Eigen::VectorXd::Constant(J, 1.0 / J));
  CHECK(plan.cost == doctest::Approx(0.0));
  CHECK((plan.coupling - Eigen::MatrixXd::Identity(J, J) / J).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((resampling::transform_ensemble(X, plan) - X).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("degenerate weights force the coupling") {
  auto rng = make_stream(7, Stream::Transition);
  const int J = 6;
  const auto X = random_particles(rng, 4, J);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(J);
  w[0] = 1.0;
  const auto plan = resampling::solve_transport(resampling::cost_matrix(X), w);
  for (int j = 0; j < J; ++j) {
    CHECK(plan.coupling(0, j) == doctest::Approx(1.0 / J).epsilon(1e-14));
    for (int i = 1; i < J; ++i) CHECK(plan.coupling(i, j) == 0.0);
  }
  const auto Y = resampling::transform_ensemble(X, plan);
  for (int j = 0; j < J; ++j) CHECK((Y.col(j) - X.col(0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("transport plan properties on random instances") {
  auto rng = make_stream(8, Stream::Transition);
  for (int rep = 0; rep < 40; ++rep) {
    const int J = 2 + rep % 19;
    const int K = 1 + rep % 7;
    const auto X = random_particles(rng, K, J);
    const auto w = random_weights(rng, J);
    const auto D = resampling::cost_matrix(X);
    const auto plan = resampling::solve_transport(D, w);
    const auto& T = plan.coupling;
    CHECK((T.array() >= 0.0).all());
    CHECK((T.rowwise().sum() - w).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((T.colwise().sum().transpose().array() - 1.0 / J).abs().maxCoeff() <= 1e-9);
    CHECK(plan.cost == doctest::Approx((T.array() * D.array()).sum()).epsilon(1e-12));
    const double independent = (w * Eigen::RowVectorXd::Constant(J, 1.0 / J)).cwiseProduct(D).sum();
    CHECK(plan.cost <= independent + 1e-12);

    const auto Y = resampling::transform_ensemble(X, plan);
    CHECK((Y.rowwise().mean() - X * w).cwiseAbs().maxCoeff() <= 1e-10);
    // each output is a convex combination of inputs
    const Eigen::MatrixXd P = J * T;
    CHECK((P.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) {
        CHECK(Y(k, j) >= X.row(k).minCoeff() - 1e-12);
        CHECK(Y(k, j) <= X.row(k).maxCoeff() + 1e-12);
      }
  }
}

TEST_CASE("transport matches the simplex oracle") {
  auto rng = make_stream(9, Stream::Transition);
  for (int rep = 0; rep < 15; ++rep) {
    const int J = 2 + rep % 11;
    const auto X = random_particles(rng, 3, J);
    const auto w = random_weights(rng, J);
    const auto D = resampling::cost_matrix(X);
    const auto lp = oracle::transport_lp(D, w);
    REQUIRE(lp.feasible);
    const double ours = resampling::solve_transport(D, w).cost;
    CHECK(std::abs(ours - lp.objective) <= 1e-8 * std::max(1.0, std::abs(lp.objective)));
  }
}

TEST_CASE("duplicate particles and deterministic ties") {
  Eigen::MatrixXd X(2, 5);
  X << 0, 0, 1, 1, 2, 0, 0, 1, 1, 2;
  const Eigen::VectorXd w = (Eigen::VectorXd(5) << 0.4, 0.1, 0.1, 0.3, 0.1).finished();
  const auto D = resampling::cost_matrix(X);
  const auto a = resampling::solve_transport(D, w);
  const auto b = resampling::solve_transport(D, w);
  CHECK(a.coupling == b.coupling);
  CHECK(a.cost == doctest::Approx(oracle::transport_lp(D, w).objective).epsilon(1e-10));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(resampling::solve_transport(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Constant(3, 1.0 / 3)),
                  Error);
  CHECK_THROWS_AS(resampling::solve_transport(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Constant(2, 0.7)), Error);
  auto rng = make_stream(1, Stream::Transition);
  CHECK_THROWS_AS(resampling::multinomial_resample((Eigen::VectorXd(2) << -0.5, 1.5).finished(), rng), Error);
}

}  // TEST_SUITE

TEST_SUITE("oracles") {

TEST_CASE("simplex on a textbook LP") {
  // min -x - y s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4
  Eigen::MatrixXd A(3, 5);
  A << 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 1, 0, 0, 1;
  const auto r = oracle::simplex(A, Eigen::Vector3d(2, 3, 4), (Eigen::VectorXd(5) << -1, -1, 0, 0, 0).finished());
  CHECK(r.feasible);
  CHECK(r.objective == doctest::Approx(-4.0));
  const auto bad = oracle::simplex(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Constant(1, -1.0),
                                   Eigen::VectorXd::Zero(2));
  CHECK_FALSE(bad.feasible);
}

TEST_CASE("simplex agrees with the two-point transport formula") {
  auto rng = make_stream(10, Stream::Transition);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd d = standard_normal(rng, 4).cwiseAbs();
    const Eigen::MatrixXd D = (Eigen::MatrixXd(2, 2) << d[0], d[1], d[2], d[3]).finished();
    const auto w = random_weights(rng, 2);
    CHECK(oracle::transport_lp(D, w).objective == doctest::Approx(oracle::transport_two_point(D, w)).epsilon(1e-10));
  }
}

TEST_CASE("simplex agrees with permutation enumeration for uniform weights") {
  auto rng = make_stream(11, Stream::Transition);
  for (int J = 2; J <= 6; ++J)
    for (int rep = 0; rep < 5; ++rep) {
      const auto X = random_particles(rng, 2, J);
      const auto D = resampling::cost_matrix(X);
      // an asymmetric cost keeps the diagonal from being trivially optimal
      Eigen::MatrixXd C = D;
      for (int i = 0; i < J; ++i) C(i, i) += 1.0;
      CHECK(oracle::transport_lp(C, Eigen::VectorXd::Constant(J, 1.0 / J)).objective ==
            doctest::Approx(oracle::assignment_brute_force(C)).epsilon(1e-10));
    }
}

}  // TEST_SUITE
