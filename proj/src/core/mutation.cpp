#include "mutation.hpp"

#include "bayes.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace dsmc::mutation {

namespace {

constexpr double kLowAcceptance = 0.2;
constexpr double kHighAcceptance = 0.3;
constexpr double kShrink = 0.8;
constexpr double kGrow = 1.25;

bool metropolis(double phi, double misfit_new, double misfit_old, Rng& rng) {
  const double a = acceptance_probability(phi, misfit_new, misfit_old);
  if (a >= 1.0) return true;
  return uniform01(rng) < a;
}

double adapt(double step, double rate) {
  if (rate < kLowAcceptance) return step * kShrink;
  if (rate > kHighAcceptance) return step * kGrow;
  return step;
}

}  // namespace

ForwardFn forward_fn(const ForwardModel& model) {
  return [&model](const Parameter& u) { return model.predict(u); };
}

State evaluate(const Target& target, Parameter u) {
  State s;
  s.predictions = target.forward(u);
  s.misfit = bayes::misfit(*target.y, s.predictions, target.sigma);
  s.u = std::move(u);
  return s;
}

void validate(const KernelConfig& cfg) {
  require(cfg.beta > 0.0 && cfg.beta <= 1.0 && cfg.beta_outside > 0.0 && cfg.beta_outside <= 1.0,
          ErrorKind::Config, "pcn beta must lie in (0, 1]");
  for (double s : cfg.geom_step) require(s >= 0.0, ErrorKind::Config, "geometry step sizes must be nonnegative");
  require(cfg.n_mu >= 1, ErrorKind::Config, "n_mu must be at least 1");
}

void AcceptanceStats::merge(const AcceptanceStats& other) {
  for (int b = 0; b < 3; ++b) {
    accepted[b] += other.accepted[b];
    proposed[b] += other.proposed[b];
  }
}

double AcceptanceStats::rate(int block) const {
  return proposed[block] > 0 ? static_cast<double>(accepted[block]) / static_cast<double>(proposed[block]) : 0.0;
}

Eigen::VectorXd pcn_proposal(const Eigen::VectorXd& v, double mean, double beta, const prior::CovFactor& factor,
                             Rng& rng) {
  const double rho = std::sqrt(1.0 - beta * beta);
  Eigen::VectorXd out = prior::sample_centered(factor, rng);
  out *= beta;
  out += rho * v;
  out.array() += (1.0 - rho) * mean;
  return out;
}

double acceptance_probability(double phi, double misfit_new, double misfit_old) {
  const double log_a = -phi * (misfit_new - misfit_old);
  if (!(log_a < 0.0)) return 1.0;
  return std::exp(log_a);
}

double reflect(double x, double lo, double hi) {
  const double width = hi - lo;
  if (width <= 0.0) return lo;
  if (x >= lo && x <= hi) return x;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return lo + y;
}

bool pcn_step(State& state, const Target& target, const KernelConfig& cfg, Rng& rng) {
  require(state.u.model() == ModelKind::P1, ErrorKind::InvalidArgument, "pcn_step expects a P1 state");
  const auto& spec = target.prior->spec();
  const auto& field = state.u.field().logk;
  Eigen::VectorXd v = pcn_proposal(field.values, spec.field.mean, cfg.beta, target.prior->primary_factor(), rng);
  State proposal = evaluate(target, FieldParameter{GridField(field.grid, std::move(v))});
  if (!metropolis(target.phi, proposal.misfit, state.misfit, rng)) return false;
  state = std::move(proposal);
  return true;
}

std::array<bool, 3> mwg_step(State& state, const Target& target, const KernelConfig& cfg, Rng& rng) {
  require(state.u.model() == ModelKind::P2, ErrorKind::InvalidArgument, "mwg_step expects a P2 state");
  const auto& spec = target.prior->spec();
  std::array<bool, 3> accepted{};

  {
    ChannelParameter c = state.u.channel();
    bool moved = false;
    for (int i = 0; i < 5; ++i) {
      const auto& b = spec.bounds[i];
      const double step = cfg.geom_step[i] * b.width();
      if (step == 0.0) continue;
      const double xi = std::normal_distribution<double>(0.0, 1.0)(rng);
      c.geom.d[i] = reflect(c.geom.d[i] + step * xi, b.lo, b.hi);
      moved = true;
    }
    if (!moved) {
      accepted[0] = true;
    } else {
      State proposal = evaluate(target, c);
      if (metropolis(target.phi, proposal.misfit, state.misfit, rng)) {
        state = std::move(proposal);
        accepted[0] = true;
      }
    }
  }
  {
    const ChannelParameter& cur = state.u.channel();
    ChannelParameter c = cur;
    c.inside.values = pcn_proposal(cur.inside.values, spec.inside.mean, cfg.beta, target.prior->primary_factor(), rng);
    State proposal = evaluate(target, std::move(c));
    if (metropolis(target.phi, proposal.misfit, state.misfit, rng)) {
      state = std::move(proposal);
      accepted[1] = true;
    }
  }
  {
    const ChannelParameter& cur = state.u.channel();
    ChannelParameter c = cur;
    c.outside.values =
        pcn_proposal(cur.outside.values, spec.outside.mean, cfg.beta_outside, target.prior->outside_factor(), rng);
    State proposal = evaluate(target, std::move(c));
    if (metropolis(target.phi, proposal.misfit, state.misfit, rng)) {
      state = std::move(proposal);
      accepted[2] = true;
    }
  }
  return accepted;
}

void mutate(State& state, const Target& target, const KernelConfig& cfg, Rng& rng, AcceptanceStats& stats) {
  require(cfg.n_mu >= 1, ErrorKind::Config, "n_mu must be at least 1");
  for (int k = 0; k < cfg.n_mu; ++k) {
    if (state.u.model() == ModelKind::P1) {
      ++stats.proposed[0];
      if (pcn_step(state, target, cfg, rng)) ++stats.accepted[0];
    } else {
      const auto acc = mwg_step(state, target, cfg, rng);
      for (int b = 0; b < 3; ++b) {
        ++stats.proposed[b];
        if (acc[b]) ++stats.accepted[b];
      }
    }
  }
}

KernelConfig tune_acceptance(const AcceptanceStats& history, const KernelConfig& cfg, ModelKind model) {
  require(history.proposed[0] > 0, ErrorKind::InvalidArgument, "tune_acceptance: empty history");
  KernelConfig out = cfg;
  if (model == ModelKind::P1) {
    out.beta = std::min(1.0, adapt(cfg.beta, history.rate(0)));
    return out;
  }
  const double geom_rate = history.rate(0);
  for (auto& s : out.geom_step) s = std::min(1.0, adapt(s, geom_rate));
  out.beta = std::min(1.0, adapt(cfg.beta, history.rate(1)));
  out.beta_outside = std::min(1.0, adapt(cfg.beta_outside, history.rate(2)));
  return out;
}

}  // namespace dsmc::mutation
