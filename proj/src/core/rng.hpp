#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsmc {

using Rng = std::mt19937_64;

/// Named stream purposes. A root seed expands into independent generators
/// keyed by (purpose, indices...) so results never depend on scheduling.
enum class Stream : std::uint64_t {
  Truth = 1,
  Noise = 2,
  Init = 3,
  Tempering = 4,
  Transition = 5,
  Mutation = 6,
  Kalman = 7,
  Reference = 8,
};

Rng make_stream(std::uint64_t seed, Stream purpose, std::initializer_list<std::uint64_t> indices = {});

/// Vector of independent standard normal draws.
Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);

double uniform01(Rng& rng);

}  // namespace dsmc
