#include "dsmc/dsmc.h"

#include "config.hpp"
#include "error.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "problem.hpp"
#include "reference.hpp"
#include "resampling.hpp"
#include "smc.hpp"
#include "sweep.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>
#include <string>

struct dsmc_config {
  std::string text;
  dsmc::Overrides overrides;
  dsmc::RunConfig resolved;
};

struct dsmc_problem {
  dsmc::Problem problem;
};

struct dsmc_run {
  dsmc::RunConfig config;
  dsmc::smc::RunResult result;
};

struct dsmc_reference {
  dsmc::RunConfig config;
  dsmc::smc::ReferenceArchive archive;
};

struct dsmc_sweep {
  dsmc::RunConfig config;
  dsmc::sweep::SweepResult result;
};

namespace {

thread_local std::string g_last_error;

dsmc_status to_status(dsmc::ErrorKind kind) {
  using dsmc::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return DSMC_ERR_INVALID_ARGUMENT;
    case ErrorKind::Domain: return DSMC_ERR_DOMAIN;
    case ErrorKind::Dimension: return DSMC_ERR_DIMENSION;
    case ErrorKind::InvalidField: return DSMC_ERR_INVALID_FIELD;
    case ErrorKind::Config: return DSMC_ERR_CONFIG;
    case ErrorKind::Numerical: return DSMC_ERR_NUMERICAL;
    case ErrorKind::Io: return DSMC_ERR_IO;
    case ErrorKind::Contract: return DSMC_ERR_CONTRACT;
  }
  return DSMC_ERR_INTERNAL;
}

dsmc_status set_error(dsmc_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

/// Runs body, translating exceptions into status codes.
template <typename Body>
dsmc_status guard(Body&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const dsmc::Error& e) {
    return set_error(to_status(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DSMC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DSMC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(DSMC_ERR_INTERNAL, "unknown error");
  }
}

dsmc_status null_arg(const char* what) { return set_error(DSMC_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL"); }

dsmc_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return cap == 0 ? DSMC_OK : null_arg("buffer");
  if (cap < s.size() + 1) return set_error(DSMC_ERR_BUFFER, "buffer too small: need " + std::to_string(s.size() + 1));
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return DSMC_OK;
}

dsmc_status copy_doubles(const Eigen::MatrixXd& m, double* out, size_t cap) {
  const auto n = static_cast<size_t>(m.size());
  if (!out) return null_arg("output buffer");
  if (cap < n) return set_error(DSMC_ERR_BUFFER, "buffer too small: need " + std::to_string(n) + " values");
  std::memcpy(out, m.data(), n * sizeof(double));
  return DSMC_OK;
}

dsmc::Method to_method(dsmc_method m) {
  switch (m) {
    case DSMC_METHOD_MONOMIAL: return dsmc::Method::Monomial;
    case DSMC_METHOD_TRANSPORT: return dsmc::Method::Transport;
    case DSMC_METHOD_KALMAN: return dsmc::Method::Kalman;
  }
  dsmc::fail(dsmc::ErrorKind::InvalidArgument, "unknown method " + std::to_string(static_cast<int>(m)));
}

dsmc_method from_method(dsmc::Method m) {
  switch (m) {
    case dsmc::Method::Monomial: return DSMC_METHOD_MONOMIAL;
    case dsmc::Method::Transport: return DSMC_METHOD_TRANSPORT;
    case dsmc::Method::Kalman: return DSMC_METHOD_KALMAN;
  }
  return DSMC_METHOD_MONOMIAL;
}

dsmc_metrics to_c(const dsmc::metrics::RunMetrics& m) {
  dsmc_metrics out{};
  out.error_field = m.error_field;
  out.error_inside = m.error_inside;
  out.error_outside = m.error_outside;
  for (int i = 0; i < 5; ++i) out.kl[i] = m.kl[static_cast<std::size_t>(i)];
  return out;
}

dsmc_iteration_info to_c(const dsmc::smc::IterationRecord& it) {
  dsmc_iteration_info out{};
  out.iteration = it.iteration;
  out.phi = it.phi;
  out.ess = it.ess;
  out.log_increment = it.log_increment;
  out.bisection_iterations = it.bisection_iterations;
  for (int b = 0; b < 3; ++b) out.acceptance[b] = it.acceptance[static_cast<std::size_t>(b)];
  out.transport_pivots = it.transport_pivots;
  out.seconds = it.seconds;
  return out;
}

dsmc_status make_config(std::string text, dsmc::Overrides overrides, dsmc_config** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guard([&] {
    auto resolved = dsmc::parse_config_text(text, overrides);
    *out = new dsmc_config{std::move(text), std::move(overrides), std::move(resolved)};
    return DSMC_OK;
  });
}

}  // namespace

extern "C" {

const char* dsmc_version(void) { return "0.1.0"; }

const char* dsmc_last_error(void) { return g_last_error.c_str(); }

const char* dsmc_status_string(dsmc_status status) {
  switch (status) {
    case DSMC_OK: return "ok";
    case DSMC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DSMC_ERR_DOMAIN: return "domain error";
    case DSMC_ERR_DIMENSION: return "dimension mismatch";
    case DSMC_ERR_INVALID_FIELD: return "invalid field";
    case DSMC_ERR_CONFIG: return "configuration error";
    case DSMC_ERR_NUMERICAL: return "numerical failure";
    case DSMC_ERR_IO: return "i/o error";
    case DSMC_ERR_CONTRACT: return "contract violation";
    case DSMC_ERR_BUFFER: return "buffer too small";
    case DSMC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

dsmc_status dsmc_config_default(dsmc_model model, dsmc_config** out) {
  if (model != DSMC_MODEL_P1 && model != DSMC_MODEL_P2) return set_error(DSMC_ERR_INVALID_ARGUMENT, "unknown model");
  return make_config(model == DSMC_MODEL_P1 ? "model: p1" : "model: p2", {}, out);
}

dsmc_status dsmc_config_parse(const char* text, dsmc_config** out) {
  if (!text) return null_arg("text");
  return make_config(text, {}, out);
}

dsmc_status dsmc_config_load(const char* path, dsmc_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  std::string text;
  const auto st = guard([&] {
    text = dsmc::io::read_text(path);
    return DSMC_OK;
  });
  if (st != DSMC_OK) return st;
  return make_config(std::move(text), {}, out);
}

dsmc_status dsmc_config_set(dsmc_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key || !value) return null_arg("key or value");
  return guard([&] {
    auto overrides = cfg->overrides;
    overrides.emplace_back(key, value);
    cfg->resolved = dsmc::parse_config_text(cfg->text, overrides);
    cfg->overrides = std::move(overrides);
    return DSMC_OK;
  });
}

dsmc_status dsmc_config_get(const dsmc_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  if (!key) return null_arg("key");
  return guard([&] {
    auto node = nlohmann::json::parse(dsmc::to_json(cfg->resolved));
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
      if (!node.is_object() || !node.contains(part))
        return set_error(DSMC_ERR_CONFIG, std::string("unknown configuration key '") + key + "'");
      node = nlohmann::json(node[part]);
    }
    return copy_string(node.is_string() ? node.get<std::string>() : node.dump(), buf, cap, needed);
  });
}

dsmc_status dsmc_config_to_json(const dsmc_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  return guard([&] { return copy_string(dsmc::to_json(cfg->resolved), buf, cap, needed); });
}

dsmc_status dsmc_config_hash(const dsmc_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  return guard([&] { return copy_string(dsmc::config_hash(cfg->resolved), buf, cap, needed); });
}

dsmc_status dsmc_config_model(const dsmc_config* cfg, dsmc_model* out) {
  if (!cfg || !out) return null_arg("config or out");
  *out = cfg->resolved.model == dsmc::ModelKind::P1 ? DSMC_MODEL_P1 : DSMC_MODEL_P2;
  return DSMC_OK;
}

void dsmc_config_free(dsmc_config* cfg) { delete cfg; }

dsmc_status dsmc_problem_create(const dsmc_config* cfg, dsmc_problem** out) {
  if (!cfg || !out) return null_arg("config or out");
  *out = nullptr;
  return guard([&] {
    *out = new dsmc_problem{dsmc::make_problem(cfg->resolved)};
    return DSMC_OK;
  });
}

dsmc_status dsmc_problem_info_get(const dsmc_problem* problem, dsmc_problem_info* out) {
  if (!problem || !out) return null_arg("problem or out");
  const auto& p = problem->problem;
  out->model = p.config.model == dsmc::ModelKind::P1 ? DSMC_MODEL_P1 : DSMC_MODEL_P2;
  out->nx = p.grid.nx;
  out->ny = p.grid.ny;
  out->observations = p.forward->num_observations();
  out->parameter_dimension = dsmc::resampling::flat_dimension(p.truth_coarse);
  out->sigma = p.data.sigma;
  return DSMC_OK;
}

dsmc_status dsmc_problem_data(const dsmc_problem* problem, double* out, size_t cap) {
  if (!problem) return null_arg("problem");
  return copy_doubles(problem->problem.data.y, out, cap);
}

dsmc_status dsmc_problem_truth(const dsmc_problem* problem, double* out, size_t cap) {
  if (!problem) return null_arg("problem");
  return guard([&] { return copy_doubles(dsmc::resampling::flatten(problem->problem.truth_coarse), out, cap); });
}

dsmc_status dsmc_problem_export(const dsmc_problem* problem, const char* dir) {
  if (!problem || !dir) return null_arg("problem or dir");
  return guard([&] {
    dsmc::io::export_problem(dir, problem->problem);
    return DSMC_OK;
  });
}

void dsmc_problem_free(dsmc_problem* problem) { delete problem; }

dsmc_status dsmc_run_smc(const dsmc_problem* problem, dsmc_method method, int particles, const uint64_t* seed,
                         dsmc_iteration_callback callback, void* user, dsmc_run** out) {
  if (!problem || !out) return null_arg("problem or out");
  *out = nullptr;
  return guard([&] {
    const auto& p = problem->problem;
    const int j = particles > 0 ? particles : p.config.particles;
    const std::uint64_t s = seed ? *seed : p.config.seed;
    dsmc::smc::RunOptions opts;
    opts.threads = p.config.threads;
    if (callback)
      opts.on_iteration = [&](const dsmc::smc::IterationRecord& it) {
        const auto info = to_c(it);
        callback(&info, user);
      };
    auto* run = new dsmc_run{p.config, dsmc::smc::run_smc(p, to_method(method), j, s, opts)};
    *out = run;
    if (!run->result.record.completed) return set_error(to_status(run->result.record.error_kind), run->result.record.error);
    return DSMC_OK;
  });
}

dsmc_status dsmc_run_summary_get(const dsmc_run* run, dsmc_run_summary* out) {
  if (!run || !out) return null_arg("run or out");
  const auto& r = run->result.record;
  out->method = from_method(r.method);
  out->particles = r.particles;
  out->seed = r.seed;
  out->completed = r.completed ? 1 : 0;
  out->iterations = static_cast<int>(r.iterations.size());
  out->parameter_dimension =
      run->result.ensemble.particles.empty() ? 0 : dsmc::resampling::flat_dimension(run->result.ensemble.particles[0].u);
  out->log_evidence = r.log_evidence;
  out->seconds = r.seconds;
  return DSMC_OK;
}

dsmc_status dsmc_run_iteration(const dsmc_run* run, int index, dsmc_iteration_info* out) {
  if (!run || !out) return null_arg("run or out");
  const auto& its = run->result.record.iterations;
  if (index < 0 || static_cast<size_t>(index) >= its.size())
    return set_error(DSMC_ERR_INVALID_ARGUMENT, "iteration index out of range");
  *out = to_c(its[static_cast<size_t>(index)]);
  return DSMC_OK;
}

dsmc_status dsmc_run_ensemble(const dsmc_run* run, double* out, size_t cap) {
  if (!run) return null_arg("run");
  if (run->result.ensemble.particles.empty()) return set_error(DSMC_ERR_INVALID_ARGUMENT, "run has no ensemble");
  return guard([&] { return copy_doubles(run->result.ensemble.flat(), out, cap); });
}

dsmc_status dsmc_run_metrics(const dsmc_run* run, const dsmc_reference* reference, dsmc_metrics* out) {
  if (!run || !reference || !out) return null_arg("run, reference or out");
  if (run->result.ensemble.particles.empty()) return set_error(DSMC_ERR_INVALID_ARGUMENT, "run has no ensemble");
  return guard([&] {
    const auto& ens = run->result.ensemble;
    *out = to_c(dsmc::metrics::compare(ens.flat(), reference->archive.samples, ens.particles.front().u,
                                       run->config.prior.bounds, run->config.bins_for(ens.size())));
    return DSMC_OK;
  });
}

dsmc_status dsmc_run_export(const dsmc_run* run, const dsmc_reference* reference, const char* dir) {
  if (!run || !dir) return null_arg("run or dir");
  return guard([&] {
    dsmc::io::export_results(dir, run->config, run->result, reference ? &reference->archive : nullptr);
    return DSMC_OK;
  });
}

void dsmc_run_free(dsmc_run* run) { delete run; }

dsmc_status dsmc_reference_run(const dsmc_problem* problem, const uint64_t* seed, dsmc_reference** out) {
  if (!problem || !out) return null_arg("problem or out");
  *out = nullptr;
  return guard([&] {
    const auto& p = problem->problem;
    dsmc::smc::ReferenceOptions opts;
    opts.threads = p.config.threads;
    *out = new dsmc_reference{p.config, dsmc::smc::run_reference(p, seed ? *seed : p.config.seed, opts)};
    return DSMC_OK;
  });
}

dsmc_status dsmc_reference_load(const dsmc_problem* problem, const char* dir, dsmc_reference** out) {
  if (!problem || !dir || !out) return null_arg("problem, dir or out");
  *out = nullptr;
  return guard([&] {
    const auto& p = problem->problem;
    *out = new dsmc_reference{p.config, dsmc::io::read_reference(dir, p.truth_coarse)};
    return DSMC_OK;
  });
}

dsmc_status dsmc_reference_export(const dsmc_reference* reference, const char* dir) {
  if (!reference || !dir) return null_arg("reference or dir");
  return guard([&] {
    dsmc::io::export_reference(dir, reference->config, reference->archive);
    return DSMC_OK;
  });
}

dsmc_status dsmc_reference_size(const dsmc_reference* reference, size_t* samples, size_t* dimension) {
  if (!reference) return null_arg("reference");
  if (samples) *samples = static_cast<size_t>(reference->archive.samples.cols());
  if (dimension) *dimension = static_cast<size_t>(reference->archive.samples.rows());
  return DSMC_OK;
}

dsmc_status dsmc_reference_samples(const dsmc_reference* reference, double* out, size_t cap) {
  if (!reference) return null_arg("reference");
  return copy_doubles(reference->archive.samples, out, cap);
}

dsmc_status dsmc_reference_mode_count(const dsmc_reference* reference, int coordinate, int bins, double lo, double hi,
                                      int* modes) {
  if (!reference || !modes) return null_arg("reference or modes");
  return guard([&] {
    const auto& s = reference->archive.samples;
    if (coordinate < 0 || coordinate >= s.rows())
      return set_error(DSMC_ERR_INVALID_ARGUMENT, "coordinate out of range");
    const Eigen::VectorXd x = s.row(coordinate).transpose();
    const auto h = dsmc::metrics::histogram(x, Eigen::VectorXd::Ones(x.size()), {bins, {lo, hi}});
    *modes = dsmc::metrics::count_modes(h);
    return DSMC_OK;
  });
}

void dsmc_reference_free(dsmc_reference* reference) { delete reference; }

dsmc_status dsmc_sweep_run(const dsmc_problem* problem, const dsmc_reference* reference, dsmc_sweep_callback callback,
                           void* user, dsmc_sweep** out) {
  if (!problem || !out) return null_arg("problem or out");
  *out = nullptr;
  return guard([&] {
    const auto& p = problem->problem;
    dsmc::sweep::SweepOptions opts;
    opts.threads = p.config.threads;
    if (callback)
      opts.on_run = [&](const dsmc::io::MetricsRow& r) {
        dsmc_sweep_row row{};
        row.method = from_method(r.method);
        row.particles = r.particles;
        row.seed = r.seed;
        row.completed = r.completed ? 1 : 0;
        row.iterations = r.iterations;
        row.seconds = r.seconds;
        row.has_metrics = r.metrics ? 1 : 0;
        if (r.metrics) row.metrics = to_c(*r.metrics);
        row.message = r.error.c_str();
        callback(&row, user);
      };
    *out = new dsmc_sweep{p.config,
                          dsmc::sweep::run_experiment_sweep(p, reference ? &reference->archive : nullptr, opts)};
    return DSMC_OK;
  });
}

dsmc_status dsmc_sweep_size(const dsmc_sweep* sweep, size_t* rows) {
  if (!sweep || !rows) return null_arg("sweep or rows");
  *rows = sweep->result.rows.size();
  return DSMC_OK;
}

dsmc_status dsmc_sweep_row_get(const dsmc_sweep* sweep, size_t index, dsmc_sweep_row* out) {
  if (!sweep || !out) return null_arg("sweep or out");
  if (index >= sweep->result.rows.size()) return set_error(DSMC_ERR_INVALID_ARGUMENT, "row index out of range");
  const auto& r = sweep->result.rows[index];
  *out = {};
  out->method = from_method(r.method);
  out->particles = r.particles;
  out->seed = r.seed;
  out->completed = r.completed ? 1 : 0;
  out->iterations = r.iterations;
  out->seconds = r.seconds;
  out->has_metrics = r.metrics ? 1 : 0;
  if (r.metrics) out->metrics = to_c(*r.metrics);
  out->message = r.error.c_str();
  return DSMC_OK;
}

dsmc_status dsmc_sweep_export(const dsmc_sweep* sweep, const char* dir) {
  if (!sweep || !dir) return null_arg("sweep or dir");
  return guard([&] {
    dsmc::sweep::export_sweep(dir, sweep->config, sweep->result);
    return DSMC_OK;
  });
}

void dsmc_sweep_free(dsmc_sweep* sweep) { delete sweep; }

dsmc_status dsmc_metrics_from_files(const dsmc_problem* problem, const char* ensemble_csv, const char* reference_dir,
                                    const char* out_csv, dsmc_metrics* out) {
  if (!problem || !ensemble_csv || !reference_dir) return null_arg("problem, ensemble_csv or reference_dir");
  return guard([&] {
    const auto& p = problem->problem;
    std::vector<std::string> header;
    const auto flat = dsmc::io::read_matrix(ensemble_csv, &header);
    if (header != dsmc::io::flat_header(p.truth_coarse))
      return set_error(DSMC_ERR_DIMENSION, std::string(ensemble_csv) + ": columns do not match the configured model");
    if (flat.cols() == 0) return set_error(DSMC_ERR_INVALID_ARGUMENT, std::string(ensemble_csv) + " has no particles");
    const auto reference = dsmc::io::read_reference(reference_dir, p.truth_coarse);
    const int j = static_cast<int>(flat.cols());
    const auto m = dsmc::metrics::compare(flat, reference.samples, p.truth_coarse, p.config.prior.bounds,
                                          p.config.bins_for(j));
    if (out) *out = to_c(m);
    if (out_csv) {
      dsmc::io::Table t;
      t.header = {"particles", "reference_samples", "bins"};
      t.rows.push_back({std::to_string(j), std::to_string(reference.size()), std::to_string(p.config.bins_for(j))});
      if (p.config.model == dsmc::ModelKind::P1) {
        t.header.push_back("error_field");
        t.rows[0].push_back(dsmc::io::format_double(m.error_field));
      } else {
        t.header.insert(t.header.end(), {"error_outside", "error_inside", "kl_d1", "kl_d2", "kl_d3", "kl_d4", "kl_d5"});
        t.rows[0].push_back(dsmc::io::format_double(m.error_outside));
        t.rows[0].push_back(dsmc::io::format_double(m.error_inside));
        for (double kl : m.kl) t.rows[0].push_back(dsmc::io::format_double(kl));
      }
      dsmc::io::write_table(out_csv, t);
    }
    return DSMC_OK;
  });
}

}  // extern "C"
