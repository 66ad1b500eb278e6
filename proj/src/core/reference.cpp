#include "reference.hpp"

#include "error.hpp"
#include "parallel.hpp"
#include "resampling.hpp"
#include "smc.hpp"

namespace dsmc::smc {

Parameter ReferenceArchive::sample(Eigen::Index s) const {
  require(s >= 0 && s < size(), ErrorKind::InvalidArgument, "reference sample index out of range");
  return resampling::unflatten(samples.col(s), shape);
}

Eigen::VectorXd ReferenceArchive::mean() const {
  require(size() > 0, ErrorKind::InvalidArgument, "empty reference archive");
  return samples.rowwise().mean();
}

long archived_per_chain(const ReferenceConfig& cfg) { return (cfg.length - cfg.burn_in) / cfg.thinning; }

ReferenceArchive run_chains(const mutation::Target& target, const ReferenceConfig& cfg,
                            const mutation::KernelConfig& kernel, std::uint64_t seed,
                            const ReferenceOptions& options) {
  require(cfg.chains >= 1 && cfg.length > cfg.burn_in && cfg.burn_in >= 0 && cfg.thinning >= 1,
          ErrorKind::InvalidArgument, "invalid chain length, burn-in or thinning");
  const long per_chain = archived_per_chain(cfg);
  const auto chains = static_cast<std::size_t>(cfg.chains);
  const auto model = target.prior->model();

  std::vector<Eigen::MatrixXd> kept(chains);
  std::vector<mutation::AcceptanceStats> acceptance(chains);
  std::vector<Eigen::MatrixXd> traces(chains);
  Parameter shape;

  parallel_for(chains, options.threads, [&](std::size_t c) {
    auto init = make_stream(seed, Stream::Reference, {c, 0});
    auto state = mutation::evaluate(target, target.prior->sample(init));
    auto rng = make_stream(seed, Stream::Reference, {c, 1});
    auto k = kernel;
    k.n_mu = 1;
    mutation::AcceptanceStats window;
    auto& stats = acceptance[c];
    auto& out = kept[c];
    out.resize(resampling::flat_dimension(state.u), per_chain);
    if (model == ModelKind::P2) traces[c].resize(5, cfg.length - cfg.burn_in);
    for (long s = 1; s <= cfg.length; ++s) {
      const bool burn_in = s <= cfg.burn_in;
      mutation::mutate(state, target, k, rng, burn_in ? window : stats);
      if (burn_in && options.tune && s % options.tune_window == 0) {
        k = mutation::tune_acceptance(window, k, model);
        window = {};
      }
      if (burn_in) continue;
      const long kept_step = s - cfg.burn_in;
      if (model == ModelKind::P2)
        for (int i = 0; i < 5; ++i) traces[c](i, kept_step - 1) = state.u.channel().geom.d[static_cast<std::size_t>(i)];
      if (kept_step % cfg.thinning == 0) out.col(kept_step / cfg.thinning - 1) = resampling::flatten(state.u);
    }
    if (c == 0) shape = state.u;
  });

  ReferenceArchive a;
  a.model = model;
  a.shape = shape;
  a.samples.resize(kept.front().rows(), per_chain * cfg.chains);
  for (std::size_t c = 0; c < chains; ++c) {
    a.samples.middleCols(static_cast<Eigen::Index>(c) * per_chain, per_chain) = kept[c];
    for (long s = 1; s <= per_chain; ++s) {
      a.chain.push_back(static_cast<int>(c));
      a.step.push_back(cfg.burn_in + s * cfg.thinning);
    }
  }
  a.acceptance = std::move(acceptance);
  a.geometry_trace = std::move(traces);
  return a;
}

ReferenceArchive run_reference(const Problem& problem, std::uint64_t seed, const ReferenceOptions& options) {
  auto opts = options;
  opts.tune = problem.config.tune;
  return run_chains(make_target(problem, 1.0), problem.config.reference, problem.config.kernel, seed, opts);
}

}  // namespace dsmc::smc
