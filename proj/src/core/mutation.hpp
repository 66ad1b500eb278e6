#pragma once

#include "forward.hpp"
#include "permeability.hpp"
#include "prior.hpp"
#include "rng.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>

namespace dsmc::mutation {

/// A particle together with its cached forward evaluation.
struct State {
  Parameter u;
  Eigen::VectorXd predictions;
  double misfit = 0.0;
};

/// Parameter-to-observation map.
using ForwardFn = std::function<Eigen::VectorXd(const Parameter&)>;

ForwardFn forward_fn(const ForwardModel& model);

/// Everything a kernel needs to evaluate the tempered target.
struct Target {
  ForwardFn forward;
  const prior::Prior* prior = nullptr;
  const Eigen::VectorXd* y = nullptr;
  double sigma = 1.0;
  double phi = 1.0;
};

/// Evaluates the forward model and misfit of u.
State evaluate(const Target& target, Parameter u);

/// Step sizes. beta_* drive pcn proposals, geom_step the per-coordinate
/// random-walk scale of the channel parameters as a fraction of their
/// prior interval widths.
struct KernelConfig {
  double beta = 0.2;          // P1 field, P2 inside field
  double beta_outside = 0.2;  // P2 outside field
  std::array<double, 5> geom_step{0.05, 0.05, 0.05, 0.05, 0.05};
  int n_mu = 10;

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

void validate(const KernelConfig& cfg);

/// Accepted/proposed counts per block: P1 uses block 0 only; P2 uses
/// 0 = geometry, 1 = inside field, 2 = outside field.
struct AcceptanceStats {
  std::array<long, 3> accepted{};
  std::array<long, 3> proposed{};

  void merge(const AcceptanceStats& other);
  [[nodiscard]] double rate(int block) const;
};

/// pcn proposal sqrt(1 - beta^2) v + (1 - sqrt(1 - beta^2)) m + beta xi with
/// xi ~ N(0, C).
Eigen::VectorXd pcn_proposal(const Eigen::VectorXd& v, double mean, double beta, const prior::CovFactor& factor,
                             Rng& rng);

/// min{1, exp(-phi (Phi_new - Phi_old))}.
double acceptance_probability(double phi, double misfit_new, double misfit_old);

/// Folds x back into [lo, hi] by repeated reflection at the endpoints.
double reflect(double x, double lo, double hi);

/// One pcn Metropolis step on a P1 state. Returns true when accepted.
bool pcn_step(State& state, const Target& target, const KernelConfig& cfg, Rng& rng);

/// One Metropolis-within-Gibbs sweep on a P2 state: reflected random walk on
/// the geometry, then pcn on the inside and outside fields.
std::array<bool, 3> mwg_step(State& state, const Target& target, const KernelConfig& cfg, Rng& rng);

/// n_mu kernel applications; acceptance counts are added to stats.
void mutate(State& state, const Target& target, const KernelConfig& cfg, Rng& rng, AcceptanceStats& stats);

/// Between-iteration step-size adaptation toward a 20-30% acceptance window:
/// steps shrink by 0.8 below the window and grow by 1.25 above it; pcn betas
/// are capped at 1.
KernelConfig tune_acceptance(const AcceptanceStats& history, const KernelConfig& cfg, ModelKind model);

}  // namespace dsmc::mutation
