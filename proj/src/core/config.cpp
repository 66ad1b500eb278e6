#include "config.hpp"

#include "error.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace dsmc {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& key, const std::string& msg) {
  fail(ErrorKind::Config, "config key '" + key + "': " + msg);
}

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

/// Rejects keys of a mapping outside `allowed`.
void check_keys(const YAML::Node& node, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!node.IsMap()) config_error(prefix.empty() ? "<root>" : prefix, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) config_error(join(prefix, key), "unknown key");
  }
}

template <typename T>
void read(const YAML::Node& node, const std::string& key, const std::string& path, T& out) {
  const auto child = node[key];
  if (!child) return;
  try {
    out = child.as<T>();
  } catch (const YAML::Exception&) {
    config_error(path, "cannot convert '" + YAML::Dump(child) + "'");
  }
}

template <typename T>
void read_optional(const YAML::Node& node, const std::string& key, const std::string& path, std::optional<T>& out) {
  const auto child = node[key];
  if (!child) return;
  if (child.IsNull()) {
    out.reset();
    return;
  }
  T v{};
  read(node, key, path, v);
  out = v;
}

void read_matern(const YAML::Node& node, const std::string& path, prior::MaternParams& p) {
  if (!node) return;
  check_keys(node, path, {"nu", "ell", "sigma0_sq", "mean"});
  read(node, "nu", path + ".nu", p.nu);
  read(node, "ell", path + ".ell", p.ell);
  read(node, "sigma0_sq", path + ".sigma0_sq", p.sigma0_sq);
  read(node, "mean", path + ".mean", p.mean);
}

constexpr std::array<const char*, 5> kGeomKeys{"d1", "d2", "d3", "d4", "d5"};

void read_bounds(const YAML::Node& node, const std::string& path, prior::GeometryBounds& b) {
  if (!node) return;
  check_keys(node, path, {kGeomKeys.begin(), kGeomKeys.end()});
  for (std::size_t i = 0; i < 5; ++i) {
    const auto child = node[kGeomKeys[i]];
    if (!child) continue;
    const auto key = path + "." + kGeomKeys[i];
    std::vector<double> v;
    read(node, kGeomKeys[i], key, v);
    if (v.size() != 2) config_error(key, "expected [lo, hi]");
    b[i] = {v[0], v[1]};
  }
}

darcy::SolverKind parse_solver(const std::string& s) {
  if (s == "cholesky") return darcy::SolverKind::Cholesky;
  if (s == "cg") return darcy::SolverKind::ConjugateGradient;
  config_error("solver.kind", "expected cholesky or cg, got '" + s + "'");
}

const char* solver_name(darcy::SolverKind k) { return k == darcy::SolverKind::Cholesky ? "cholesky" : "cg"; }

/// Walks a dotted path, creating maps as needed, and assigns the scalar.
void apply_override(YAML::Node& root, const std::string& key, const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) config_error(key, "malformed key");
    parts.push_back(part);
  }
  if (parts.empty()) config_error(key, "malformed key");
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    config_error(key, std::string("cannot parse value: ") + e.what());
  }
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next || next.IsNull()) {
      next = YAML::Node(YAML::NodeType::Map);
      chain.back()[parts[i]] = next;
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

RunConfig from_node(const YAML::Node& root) {
  if (root.IsNull()) config_error("model", "required");
  check_keys(root, "", {"model", "seed", "truth_seed", "threads", "output_dir", "grid", "solver", "observations",
                        "prior", "smc", "mutation", "reference", "sweep", "metrics"});
  if (!root["model"]) config_error("model", "required");
  std::string model_name;
  read(root, "model", "model", model_name);
  ModelKind model{};
  try {
    model = parse_model(model_name);
  } catch (const Error& e) {
    config_error("model", e.what());
  }

  RunConfig cfg = default_config(model);
  read(root, "seed", "seed", cfg.seed);
  read(root, "truth_seed", "truth_seed", cfg.truth_seed);
  read(root, "threads", "threads", cfg.threads);
  read(root, "output_dir", "output_dir", cfg.output_dir);

  bool eps_given = false;
  if (const auto g = root["grid"]) {
    check_keys(g, "grid", {"nx", "ny", "truth_refinement"});
    read(g, "nx", "grid.nx", cfg.nx);
    read(g, "ny", "grid.ny", cfg.ny);
    read(g, "truth_refinement", "grid.truth_refinement", cfg.truth_refinement);
  }
  if (const auto s = root["solver"]) {
    check_keys(s, "solver", {"kind", "tolerance"});
    if (s["kind"]) {
      std::string kind;
      read(s, "kind", "solver.kind", kind);
      cfg.solver = parse_solver(kind);
    }
    read(s, "tolerance", "solver.tolerance", cfg.solver_tolerance);
  }
  if (const auto o = root["observations"]) {
    check_keys(o, "observations", {"nx", "ny", "eps", "noise_fraction"});
    read(o, "nx", "observations.nx", cfg.obs_nx);
    read(o, "ny", "observations.ny", cfg.obs_ny);
    eps_given = static_cast<bool>(o["eps"]);
    read(o, "eps", "observations.eps", cfg.obs_eps);
    read(o, "noise_fraction", "observations.noise_fraction", cfg.noise_fraction);
  }
  if (!eps_given && cfg.nx > 0) cfg.obs_eps = Grid::kExtent / cfg.nx;

  if (const auto p = root["prior"]) {
    check_keys(p, "prior", {"field", "inside", "outside", "geometry"});
    read_matern(p["field"], "prior.field", cfg.prior.field);
    read_matern(p["inside"], "prior.inside", cfg.prior.inside);
    read_matern(p["outside"], "prior.outside", cfg.prior.outside);
    read_bounds(p["geometry"], "prior.geometry", cfg.prior.bounds);
  }
  if (const auto s = root["smc"]) {
    check_keys(s, "smc", {"particles", "j_thresh", "j_thresh_fraction", "bisection_tolerance",
                          "bisection_max_iterations", "max_iterations"});
    read(s, "particles", "smc.particles", cfg.particles);
    read_optional(s, "j_thresh", "smc.j_thresh", cfg.j_thresh);
    read(s, "j_thresh_fraction", "smc.j_thresh_fraction", cfg.j_thresh_fraction);
    read(s, "bisection_tolerance", "smc.bisection_tolerance", cfg.bisection_tolerance);
    read(s, "bisection_max_iterations", "smc.bisection_max_iterations", cfg.bisection_max_iterations);
    read(s, "max_iterations", "smc.max_iterations", cfg.max_iterations);
  }
  if (const auto m = root["mutation"]) {
    check_keys(m, "mutation", {"enabled", "tune", "n_mu", "beta", "beta_outside", "geom_step"});
    read(m, "enabled", "mutation.enabled", cfg.mutation_enabled);
    read(m, "tune", "mutation.tune", cfg.tune);
    read(m, "n_mu", "mutation.n_mu", cfg.kernel.n_mu);
    read(m, "beta", "mutation.beta", cfg.kernel.beta);
    read(m, "beta_outside", "mutation.beta_outside", cfg.kernel.beta_outside);
    if (const auto gs = m["geom_step"]) {
      if (gs.IsSequence()) {
        std::vector<double> v;
        read(m, "geom_step", "mutation.geom_step", v);
        if (v.size() != 5) config_error("mutation.geom_step", "expected a scalar or 5 values");
        std::copy(v.begin(), v.end(), cfg.kernel.geom_step.begin());
      } else {
        double v = 0.0;
        read(m, "geom_step", "mutation.geom_step", v);
        cfg.kernel.geom_step.fill(v);
      }
    }
  }
  if (const auto r = root["reference"]) {
    check_keys(r, "reference", {"chains", "length", "burn_in", "thinning"});
    read(r, "chains", "reference.chains", cfg.reference.chains);
    read(r, "length", "reference.length", cfg.reference.length);
    read(r, "burn_in", "reference.burn_in", cfg.reference.burn_in);
    read(r, "thinning", "reference.thinning", cfg.reference.thinning);
  }
  if (const auto s = root["sweep"]) {
    check_keys(s, "sweep", {"seeds", "sizes", "methods"});
    read(s, "seeds", "sweep.seeds", cfg.sweep_seeds);
    read(s, "sizes", "sweep.sizes", cfg.sweep_sizes);
    if (s["methods"]) {
      std::vector<std::string> names;
      read(s, "methods", "sweep.methods", names);
      cfg.sweep_methods.clear();
      for (const auto& n : names) {
        try {
          cfg.sweep_methods.push_back(parse_method(n));
        } catch (const Error& e) {
          config_error("sweep.methods", e.what());
        }
      }
    }
  }
  if (const auto m = root["metrics"]) {
    check_keys(m, "metrics", {"histogram_bins"});
    read_optional(m, "histogram_bins", "metrics.histogram_bins", cfg.histogram_bins);
  }
  validate(cfg);
  return cfg;
}

void check(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) config_error(key, msg);
}

void check_matern(const prior::MaternParams& p, const std::string& key) {
  check(std::isfinite(p.nu) && p.nu > 0, key + ".nu", "must be positive");
  check(std::isfinite(p.ell) && p.ell > 0, key + ".ell", "must be positive");
  check(std::isfinite(p.sigma0_sq) && p.sigma0_sq > 0, key + ".sigma0_sq", "must be positive");
  check(std::isfinite(p.mean), key + ".mean", "must be finite");
}

Json matern_json(const prior::MaternParams& p) {
  return Json{{"nu", p.nu}, {"ell", p.ell}, {"sigma0_sq", p.sigma0_sq}, {"mean", p.mean}};
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Monomial: return "monomial";
    case Method::Transport: return "transport";
    case Method::Kalman: return "kalman";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "monomial") return Method::Monomial;
  if (s == "transport") return Method::Transport;
  if (s == "kalman") return Method::Kalman;
  fail(ErrorKind::InvalidArgument, "unknown method '" + s + "' (expected monomial, transport or kalman)");
}

ModelKind parse_model(const std::string& s) {
  if (s == "p1") return ModelKind::P1;
  if (s == "p2") return ModelKind::P2;
  fail(ErrorKind::InvalidArgument, "unknown model '" + s + "' (expected p1 or p2)");
}

double RunConfig::threshold_for(int j) const { return j_thresh ? *j_thresh : j_thresh_fraction * j; }

int RunConfig::bins_for(int j) const { return histogram_bins ? *histogram_bins : std::max(2, j / 10); }

RunConfig default_config(ModelKind model) {
  RunConfig cfg;
  cfg.model = model;
  cfg.prior.model = model;
  if (model == ModelKind::P2) {
    cfg.nx = cfg.ny = 16;
    cfg.obs_nx = cfg.obs_ny = 3;
    cfg.prior.inside.mean = std::log(100.0);
    cfg.prior.outside.mean = std::log(15.0);
  }
  cfg.obs_eps = Grid::kExtent / cfg.nx;
  return cfg;
}

void validate(const RunConfig& c) {
  check(c.model == c.prior.model, "model", "prior model mismatch");
  check(c.threads >= 1, "threads", "must be at least 1");
  check(!c.output_dir.empty(), "output_dir", "must not be empty");
  check(c.nx >= 2, "grid.nx", "must be at least 2");
  check(c.ny >= 2, "grid.ny", "must be at least 2");
  check(c.truth_refinement >= 1, "grid.truth_refinement", "must be at least 1");
  const long fine = static_cast<long>(c.nx) * c.ny * c.truth_refinement * c.truth_refinement;
  check(fine <= prior::kMaxDenseCells, "grid",
        "truth grid of " + std::to_string(fine) + " cells exceeds the dense covariance limit of " +
            std::to_string(prior::kMaxDenseCells));
  check(std::isfinite(c.solver_tolerance) && c.solver_tolerance > 0, "solver.tolerance", "must be positive");
  check(c.obs_nx >= 1, "observations.nx", "must be at least 1");
  check(c.obs_ny >= 1, "observations.ny", "must be at least 1");
  check(std::isfinite(c.obs_eps) && c.obs_eps > 0, "observations.eps", "must be positive");
  check(std::isfinite(c.noise_fraction) && c.noise_fraction > 0, "observations.noise_fraction", "must be positive");
  check_matern(c.prior.field, "prior.field");
  check_matern(c.prior.inside, "prior.inside");
  check_matern(c.prior.outside, "prior.outside");
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& b = c.prior.bounds[i];
    const auto key = std::string("prior.geometry.") + kGeomKeys[i];
    check(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi, key, "expected finite lo < hi");
  }
  check(c.prior.bounds[2].lo > -std::numbers::pi / 2 && c.prior.bounds[2].hi < std::numbers::pi / 2,
        "prior.geometry.d3", "angle must lie inside (-pi/2, pi/2)");
  check(c.prior.bounds[4].lo > 0, "prior.geometry.d5", "width must be positive");
  check(c.particles >= 2, "smc.particles", "must be at least 2");
  check(c.j_thresh_fraction > 0 && c.j_thresh_fraction <= 1, "smc.j_thresh_fraction", "must lie in (0, 1]");
  if (c.j_thresh) {
    check(std::isfinite(*c.j_thresh) && *c.j_thresh >= 1, "smc.j_thresh", "must be at least 1");
    check(*c.j_thresh <= c.particles, "smc.j_thresh", "exceeds smc.particles");
    for (int j : c.sweep_sizes) check(*c.j_thresh <= j, "smc.j_thresh", "exceeds a sweep size");
  }
  check(c.bisection_tolerance > 0 && c.bisection_tolerance < 1, "smc.bisection_tolerance", "must lie in (0, 1)");
  check(c.bisection_max_iterations >= 1, "smc.bisection_max_iterations", "must be at least 1");
  check(c.max_iterations >= 1, "smc.max_iterations", "must be at least 1");
  check(c.kernel.n_mu >= 1, "mutation.n_mu", "must be at least 1");
  check(c.kernel.beta > 0 && c.kernel.beta <= 1, "mutation.beta", "must lie in (0, 1]");
  check(c.kernel.beta_outside > 0 && c.kernel.beta_outside <= 1, "mutation.beta_outside", "must lie in (0, 1]");
  for (double s : c.kernel.geom_step) check(std::isfinite(s) && s > 0, "mutation.geom_step", "must be positive");
  check(c.reference.chains >= 1, "reference.chains", "must be at least 1");
  check(c.reference.burn_in >= 0, "reference.burn_in", "must be nonnegative");
  check(c.reference.length > c.reference.burn_in, "reference.length", "must exceed reference.burn_in");
  check(c.reference.thinning >= 1, "reference.thinning", "must be at least 1");
  for (int j : c.sweep_sizes) check(j >= 2, "sweep.sizes", "ensemble sizes must be at least 2");
  if (c.histogram_bins) check(*c.histogram_bins >= 2, "metrics.histogram_bins", "must be at least 2");
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, std::string("config parse error: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& [key, value] : overrides) apply_override(root, key, value);
  return from_node(root);
}

RunConfig parse_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string to_json(const RunConfig& c) {
  Json geometry = Json::object();
  for (std::size_t i = 0; i < 5; ++i) geometry[kGeomKeys[i]] = {c.prior.bounds[i].lo, c.prior.bounds[i].hi};
  Json methods = Json::array();
  for (auto m : c.sweep_methods) methods.push_back(to_string(m));
  Json j{
      {"model", to_string(c.model)},
      {"seed", c.seed},
      {"truth_seed", c.truth_seed},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
      {"grid", {{"nx", c.nx}, {"ny", c.ny}, {"truth_refinement", c.truth_refinement}}},
      {"solver", {{"kind", solver_name(c.solver)}, {"tolerance", c.solver_tolerance}}},
      {"observations",
       {{"nx", c.obs_nx}, {"ny", c.obs_ny}, {"eps", c.obs_eps}, {"noise_fraction", c.noise_fraction}}},
      {"prior",
       {{"field", matern_json(c.prior.field)},
        {"inside", matern_json(c.prior.inside)},
        {"outside", matern_json(c.prior.outside)},
        {"geometry", geometry}}},
      {"smc",
       {{"particles", c.particles},
        {"j_thresh", c.j_thresh ? Json(*c.j_thresh) : Json(nullptr)},
        {"j_thresh_fraction", c.j_thresh_fraction},
        {"bisection_tolerance", c.bisection_tolerance},
        {"bisection_max_iterations", c.bisection_max_iterations},
        {"max_iterations", c.max_iterations}}},
      {"mutation",
       {{"enabled", c.mutation_enabled},
        {"tune", c.tune},
        {"n_mu", c.kernel.n_mu},
        {"beta", c.kernel.beta},
        {"beta_outside", c.kernel.beta_outside},
        {"geom_step", c.kernel.geom_step}}},
      {"reference",
       {{"chains", c.reference.chains},
        {"length", c.reference.length},
        {"burn_in", c.reference.burn_in},
        {"thinning", c.reference.thinning}}},
      {"sweep", {{"seeds", c.sweep_seeds}, {"sizes", c.sweep_sizes}, {"methods", methods}}},
      {"metrics", {{"histogram_bins", c.histogram_bins ? Json(*c.histogram_bins) : Json(nullptr)}}},
  };
  return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsmc
