#pragma once

#include "mutation.hpp"
#include "problem.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace dsmc::smc {

/// Thinned samples of independent chains targeting the full posterior.
/// Column s of `samples` is the flattened parameter; `chain` and `step`
/// record where it came from. `geometry_trace` holds every post-burn-in
/// state of the channel parameters (P2 only; 5 x kept steps per chain).
struct ReferenceArchive {
  ModelKind model = ModelKind::P1;
  Parameter shape;
  Eigen::MatrixXd samples;
  std::vector<int> chain;
  std::vector<long> step;
  std::vector<mutation::AcceptanceStats> acceptance;
  std::vector<Eigen::MatrixXd> geometry_trace;

  [[nodiscard]] Eigen::Index size() const { return samples.cols(); }
  [[nodiscard]] Parameter sample(Eigen::Index s) const;
  /// Mean of the flattened samples.
  [[nodiscard]] Eigen::VectorXd mean() const;
};

struct ReferenceOptions {
  int threads = 1;
  /// Adapt step sizes during burn-in, every `tune_window` steps.
  bool tune = true;
  int tune_window = 100;
};

/// Number of samples kept per chain: the states after steps burn_in + k thinning <= length, k >= 1.
long archived_per_chain(const ReferenceConfig& cfg);

/// Independent chains targeting `target` (normally phi = 1): pcn for P1,
/// Metropolis-within-Gibbs for P2, each started from its own prior draw.
/// Chains run concurrently; results do not depend on the thread count.
ReferenceArchive run_chains(const mutation::Target& target, const ReferenceConfig& cfg,
                            const mutation::KernelConfig& kernel, std::uint64_t seed,
                            const ReferenceOptions& options = {});

/// Reference posterior for a problem using its configured chain settings.
ReferenceArchive run_reference(const Problem& problem, std::uint64_t seed, const ReferenceOptions& options = {});

}  // namespace dsmc::smc
