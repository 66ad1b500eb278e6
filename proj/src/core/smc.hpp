#pragma once

#include "config.hpp"
#include "error.hpp"
#include "mutation.hpp"
#include "problem.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dsmc::smc {

/// Particles with cached predictions and misfits plus their weights.
struct Ensemble {
  std::vector<mutation::State> particles;
  Eigen::VectorXd weights;

  [[nodiscard]] int size() const { return static_cast<int>(particles.size()); }
  /// Column j is flatten(particles[j].u).
  [[nodiscard]] Eigen::MatrixXd flat() const;
  /// Column j holds the predictions of particle j.
  [[nodiscard]] Eigen::MatrixXd predictions() const;
  [[nodiscard]] Eigen::VectorXd misfits() const;
};

struct IterationRecord {
  int iteration = 0;
  double phi = 0.0;
  double ess = 0.0;
  double log_increment = 0.0;
  int bisection_iterations = 0;
  std::array<double, 3> acceptance{};  // NaN where no proposals were made
  mutation::KernelConfig kernel;        // step sizes used for this iteration's mutation
  long transport_pivots = 0;
  double seconds = 0.0;
};

struct RunRecord {
  Method method = Method::Monomial;
  ModelKind model = ModelKind::P1;
  int particles = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<IterationRecord> iterations;
  double log_evidence = 0.0;
  double seconds = 0.0;
  bool completed = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::Contract;
};

struct RunOptions {
  int threads = 1;
  /// Re-solves every particle after each iteration and checks the cache.
  bool verify_cache = false;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct RunResult {
  Ensemble ensemble;
  RunRecord record;
};

/// J prior draws, particle j from its own Init stream, with cached forward
/// evaluations. Shared by all methods for a given seed.
Ensemble initial_ensemble(const Problem& problem, int particles, std::uint64_t seed, int threads);

mutation::Target make_target(const Problem& problem, double phi);

/// Adaptive tempered SMC with the selected transition: multinomial
/// resampling (skipped when all weights are equal), optimal-transport
/// transform or perturbed-observation Kalman update, each followed by n_mu
/// mutation steps. Failures stop the run and are reported in the record
/// together with the ensemble reached so far.
RunResult run_smc(const Problem& problem, Method method, int particles, std::uint64_t seed,
                  const RunOptions& options = {});

/// Uses the particle count and seed from the problem configuration.
RunResult run_smc(const Problem& problem, Method method, const RunOptions& options = {});

}  // namespace dsmc::smc
