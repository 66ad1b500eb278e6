#pragma once

#include "darcy.hpp"
#include "mutation.hpp"
#include "permeability.hpp"
#include "prior.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dsmc {

enum class Method { Monomial, Transport, Kalman };

const char* to_string(Method m);
Method parse_method(const std::string& s);
ModelKind parse_model(const std::string& s);

struct ReferenceConfig {
  int chains = 4;
  long length = 100000;
  long burn_in = 10000;
  long thinning = 100;

  friend bool operator==(const ReferenceConfig&, const ReferenceConfig&) = default;
};

/// Fully resolved run configuration. Defaults follow the aquifer benchmark:
/// J_thresh = J/3, N_mu = 10, 2% noise, log-conductivity prior mean 5 for P1
/// and ln 100 / ln 15 inside / outside the channel for P2.
struct RunConfig {
  ModelKind model = ModelKind::P1;
  std::uint64_t seed = 1;
  std::uint64_t truth_seed = 2017;
  int threads = 1;
  std::string output_dir = "out";

  int nx = 24;
  int ny = 24;
  int truth_refinement = 2;
  darcy::SolverKind solver = darcy::SolverKind::Cholesky;
  double solver_tolerance = 1e-10;

  int obs_nx = 6;
  int obs_ny = 6;
  double obs_eps = 0.25;
  double noise_fraction = 0.02;

  prior::PriorSpec prior;

  int particles = 100;
  double j_thresh_fraction = 1.0 / 3.0;
  std::optional<double> j_thresh;
  double bisection_tolerance = 0.01;
  int bisection_max_iterations = 50;
  int max_iterations = 200;

  bool mutation_enabled = true;
  bool tune = true;
  mutation::KernelConfig kernel;

  ReferenceConfig reference;

  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> sweep_sizes{100, 500};
  std::vector<Method> sweep_methods{Method::Monomial, Method::Transport, Method::Kalman};

  std::optional<int> histogram_bins;

  /// ESS threshold for an ensemble of size j.
  [[nodiscard]] double threshold_for(int j) const;
  /// Histogram bin count for an ensemble of size j (J/10, at least 2).
  [[nodiscard]] int bins_for(int j) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults for a model: 24x24 grid with 6x6 observations for P1, 16x16 with
/// 3x3 for P2; kernel width one coarse cell.
RunConfig default_config(ModelKind model);

/// Dotted-key overrides applied to the document before defaults are resolved,
/// e.g. {"smc.particles", "500"}. Values are parsed as YAML scalars.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Reads a YAML (or JSON) configuration. Unknown keys and out-of-range
/// values raise a Config error naming the key.
RunConfig parse_config(const std::string& path, const Overrides& overrides = {});
RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});

/// Checks invariants; throws a Config error naming the offending key.
void validate(const RunConfig& cfg);

/// Resolved configuration as JSON text (every field explicit).
std::string to_json(const RunConfig& cfg);

/// 64-bit FNV-1a of the resolved JSON, as hex.
std::string config_hash(const RunConfig& cfg);

}  // namespace dsmc
