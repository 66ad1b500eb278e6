#include "smc.hpp"

#include "bayes.hpp"
#include "eki.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "resampling.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace dsmc::smc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

/// Replaces every particle by its flattened image and refreshes the cache.
void reevaluate(Ensemble& ens, const Eigen::MatrixXd& flat, const mutation::Target& target, int threads) {
  const auto shape = ens.particles.front().u;
  parallel_for(ens.particles.size(), threads, [&](std::size_t j) {
    ens.particles[j] = mutation::evaluate(target, resampling::unflatten(flat.col(static_cast<Eigen::Index>(j)), shape));
  });
}

void check_cache(const Ensemble& ens, const mutation::Target& target, int threads) {
  std::vector<char> ok(ens.particles.size(), 1);
  parallel_for(ens.particles.size(), threads, [&](std::size_t j) {
    const auto& p = ens.particles[j];
    ok[j] = target.forward(p.u) == p.predictions ? 1 : 0;
  });
  for (std::size_t j = 0; j < ok.size(); ++j)
    require(ok[j] != 0, ErrorKind::Contract, "cached predictions of particle " + std::to_string(j) + " are stale");
}

}  // namespace

Eigen::MatrixXd Ensemble::flat() const {
  std::vector<Parameter> us;
  us.reserve(particles.size());
  for (const auto& p : particles) us.push_back(p.u);
  return resampling::flatten_ensemble(us);
}

Eigen::MatrixXd Ensemble::predictions() const {
  require(!particles.empty(), ErrorKind::InvalidArgument, "empty ensemble");
  Eigen::MatrixXd out(particles.front().predictions.size(), size());
  for (int j = 0; j < size(); ++j) out.col(j) = particles[j].predictions;
  return out;
}

Eigen::VectorXd Ensemble::misfits() const {
  Eigen::VectorXd out(size());
  for (int j = 0; j < size(); ++j) out[j] = particles[j].misfit;
  return out;
}

mutation::Target make_target(const Problem& problem, double phi) {
  mutation::Target t;
  t.forward = mutation::forward_fn(*problem.forward);
  t.prior = problem.prior.get();
  t.y = &problem.data.y;
  t.sigma = problem.data.sigma;
  t.phi = phi;
  return t;
}

Ensemble initial_ensemble(const Problem& problem, int particles, std::uint64_t seed, int threads) {
  require(particles >= 2, ErrorKind::InvalidArgument, "ensemble needs at least 2 particles");
  const auto target = make_target(problem, 0.0);
  Ensemble ens;
  ens.particles.resize(static_cast<std::size_t>(particles));
  parallel_for(ens.particles.size(), threads, [&](std::size_t j) {
    auto rng = make_stream(seed, Stream::Init, {j});
    ens.particles[j] = mutation::evaluate(target, problem.prior->sample(rng));
  });
  ens.weights = Eigen::VectorXd::Constant(particles, 1.0 / particles);
  return ens;
}

RunResult run_smc(const Problem& problem, Method method, const RunOptions& options) {
  return run_smc(problem, method, problem.config.particles, problem.config.seed, options);
}

RunResult run_smc(const Problem& problem, Method method, int particles, std::uint64_t seed,
                  const RunOptions& options) {
  const auto& cfg = problem.config;
  const auto start = Clock::now();
  RunResult out;
  auto& rec = out.record;
  rec.method = method;
  rec.model = cfg.model;
  rec.particles = particles;
  rec.seed = seed;
  rec.config_hash = config_hash(cfg);

  const double j_thresh = cfg.threshold_for(particles);
  const bayes::BisectionOptions bisection{cfg.bisection_tolerance, cfg.bisection_max_iterations};
  auto kernel = cfg.kernel;
  const int threads = std::max(1, options.threads);

  try {
    require(j_thresh <= particles, ErrorKind::Config, "ESS threshold exceeds the ensemble size");
    out.ensemble = initial_ensemble(problem, particles, seed, threads);
    auto& ens = out.ensemble;
    double phi = 0.0;
    for (int n = 1; phi < 1.0; ++n) {
      require(n <= cfg.max_iterations, ErrorKind::Numerical,
              "tempering did not reach phi = 1 within " + std::to_string(cfg.max_iterations) + " iterations");
      const auto iter_start = Clock::now();
      IterationRecord it;
      it.iteration = n;

      const auto misfits = ens.misfits();
      const auto step = bayes::next_temperature(misfits, phi, j_thresh, bisection);
      require(step.phi > phi, ErrorKind::Contract, "tempering parameter failed to increase");
      it.phi = step.phi;
      it.ess = step.ess;
      it.bisection_iterations = step.bisection_iterations;
      it.log_increment = bayes::log_increment(misfits, phi, step.phi);
      rec.log_evidence += it.log_increment;
      ens.weights = step.weights;

      const auto target = make_target(problem, step.phi);
      switch (method) {
        case Method::Monomial: {
          // Equal weights leave the empirical measure unchanged.
          if ((ens.weights.array() == ens.weights[0]).all()) break;
          auto rng = make_stream(seed, Stream::Transition, {static_cast<std::uint64_t>(n)});
          const auto idx = resampling::multinomial_resample(ens.weights, rng);
          std::vector<mutation::State> next;
          next.reserve(idx.size());
          for (int i : idx) next.push_back(ens.particles[static_cast<std::size_t>(i)]);
          ens.particles = std::move(next);
          break;
        }
        case Method::Transport: {
          const auto flat = ens.flat();
          const auto plan = resampling::solve_transport(resampling::cost_matrix(flat), ens.weights);
          it.transport_pivots = plan.pivots;
          reevaluate(ens, resampling::transform_ensemble(flat, plan), target, threads);
          break;
        }
        case Method::Kalman: {
          const double alpha = eki::inflation(phi, step.phi);
          const auto noise = [&](Eigen::Index j, Eigen::Index m) {
            auto rng = make_stream(seed, Stream::Kalman, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(j)});
            return standard_normal(rng, m);
          };
          auto updated = eki::eki_transform(ens.flat(), ens.predictions(), problem.data.y, alpha,
                                            problem.data.sigma * problem.data.sigma, noise);
          if (cfg.model == ModelKind::P2)
            for (Eigen::Index j = 0; j < updated.cols(); ++j) eki::eki_project(updated.col(j), cfg.prior.bounds);
          reevaluate(ens, updated, target, threads);
          break;
        }
      }
      ens.weights = Eigen::VectorXd::Constant(particles, 1.0 / particles);

      it.acceptance.fill(std::numeric_limits<double>::quiet_NaN());
      it.kernel = kernel;
      if (cfg.mutation_enabled) {
        std::vector<mutation::AcceptanceStats> stats(ens.particles.size());
        parallel_for(ens.particles.size(), threads, [&](std::size_t j) {
          auto rng = make_stream(seed, Stream::Mutation, {static_cast<std::uint64_t>(n), j});
          mutation::mutate(ens.particles[j], target, kernel, rng, stats[j]);
        });
        mutation::AcceptanceStats total;
        for (const auto& s : stats) total.merge(s);
        for (int b = 0; b < 3; ++b)
          if (total.proposed[b] > 0) it.acceptance[b] = total.rate(b);
        if (cfg.tune) kernel = mutation::tune_acceptance(total, kernel, cfg.model);
      }
      if (options.verify_cache) check_cache(ens, target, threads);

      phi = step.phi;
      it.seconds = elapsed(iter_start);
      rec.iterations.push_back(it);
      if (options.on_iteration) options.on_iteration(it);
    }
    rec.completed = true;
  } catch (const Error& e) {
    rec.error = e.what();
    rec.error_kind = e.kind();
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.error_kind = ErrorKind::Numerical;
  }
  rec.seconds = elapsed(start);
  return out;
}

}  // namespace dsmc::smc
