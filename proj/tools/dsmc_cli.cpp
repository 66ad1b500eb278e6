// Command-line driver over the dsmc C API.

#include "dsmc/dsmc.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(dsmc_status st, const std::string& what) {
  if (st != DSMC_OK) throw Failure(what + ": " + dsmc_status_string(st) + ": " + dsmc_last_error());
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<dsmc_config, dsmc_config_free>;
using ProblemH = Handle<dsmc_problem, dsmc_problem_free>;
using RunH = Handle<dsmc_run, dsmc_run_free>;
using ReferenceH = Handle<dsmc_reference, dsmc_reference_free>;
using SweepH = Handle<dsmc_sweep, dsmc_sweep_free>;

struct Common {
  std::string config_path;
  std::string model;
  std::vector<std::string> sets;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "YAML or JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--model", c.model, "Parameterisation")->check(CLI::IsMember({"p1", "p2"}));
  app->add_option("--set", c.sets, "Override a configuration key, e.g. --set smc.particles=500");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--out", c.out, "Output directory");
}

std::string config_value(const Config& cfg, const char* key) {
  size_t needed = 0;
  check(dsmc_config_get(cfg.get(), key, nullptr, 0, &needed), std::string("reading ") + key);
  std::string buf(needed, '\0');
  check(dsmc_config_get(cfg.get(), key, buf.data(), buf.size(), nullptr), std::string("reading ") + key);
  buf.resize(needed - 1);
  return buf;
}

void load_config(const Common& c, Config& cfg, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  if (!c.config_path.empty()) {
    check(dsmc_config_load(c.config_path.c_str(), cfg.out()), "loading " + c.config_path);
  } else {
    check(dsmc_config_default(c.model == "p2" ? DSMC_MODEL_P2 : DSMC_MODEL_P1, cfg.out()), "default configuration");
  }
  auto set = [&](const std::string& k, const std::string& v) {
    check(dsmc_config_set(cfg.get(), k.c_str(), v.c_str()), "setting " + k);
  };
  if (!c.model.empty()) set("model", c.model);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure("--set expects key=value, got '" + s + "'");
    set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : extra) set(k, v);
  if (c.seed) set("seed", std::to_string(*c.seed));
  if (c.threads) set("threads", std::to_string(*c.threads));
}

/// --out, else $DSMC_OUTPUT_ROOT/<name>, else <output_dir>/<name>.
std::string output_dir(const Common& c, const Config& cfg, const std::string& name) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("DSMC_OUTPUT_ROOT");
  const std::string base = root && *root ? root : config_value(cfg, "output_dir");
  return (std::filesystem::path(base) / name).string();
}

void print_iteration(const dsmc_iteration_info* it, void*) {
  std::fprintf(stderr, "  iter %3d  phi %.6f  ess %8.2f  accept %.3f  %.2fs\n", it->iteration, it->phi, it->ess,
               std::isnan(it->acceptance[0]) ? 0.0 : it->acceptance[0], it->seconds);
}

void print_sweep_row(const dsmc_sweep_row* r, void*) {
  static const char* names[] = {"monomial", "transport", "kalman"};
  std::fprintf(stderr, "  %-9s J=%-4d seed=%-4llu %s iterations=%d %.1fs%s%s\n", names[r->method], r->particles,
               static_cast<unsigned long long>(r->seed), r->completed ? "ok" : "FAILED", r->iterations, r->seconds,
               r->message[0] ? " " : "", r->message);
}

dsmc_method parse_method(const std::string& m) {
  if (m == "monomial") return DSMC_METHOD_MONOMIAL;
  if (m == "transport") return DSMC_METHOD_TRANSPORT;
  return DSMC_METHOD_KALMAN;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tempered SMC for the Darcy-flow inverse problem"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dsmc_version());

  Common truth_opts;
  auto* truth_cmd = app.add_subcommand("make-truth", "Draw the truth and synthesise observations");
  add_common(truth_cmd, truth_opts);

  Common smc_opts;
  std::string method;
  std::optional<int> particles;
  std::string smc_reference;
  auto* smc_cmd = app.add_subcommand("run-smc", "Run one tempered SMC sampler");
  add_common(smc_cmd, smc_opts);
  smc_cmd->add_option("--method", method, "Transition")
      ->required()
      ->check(CLI::IsMember({"monomial", "transport", "kalman"}));
  smc_cmd->add_option("--particles", particles, "Ensemble size J")->check(CLI::Range(2, 1 << 20));
  smc_cmd->add_option("--reference", smc_reference, "Reference directory for metrics")->check(CLI::ExistingDirectory);

  Common ref_opts;
  auto* ref_cmd = app.add_subcommand("run-reference", "Run the long-chain reference posterior");
  add_common(ref_cmd, ref_opts);

  Common sweep_opts;
  std::string sweep_reference;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every seed x size x method combination");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--reference", sweep_reference, "Reference directory (computed when absent)")
      ->check(CLI::ExistingDirectory);

  Common metrics_opts;
  std::string ensemble_csv;
  std::string metrics_reference;
  auto* metrics_cmd = app.add_subcommand("metrics", "Score an exported ensemble against a reference");
  add_common(metrics_cmd, metrics_opts);
  metrics_cmd->add_option("--ensemble", ensemble_csv, "ensemble_final.csv")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--reference", metrics_reference, "Reference directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*truth_cmd) {
      Config cfg;
      load_config(truth_opts, cfg);
      ProblemH problem;
      check(dsmc_problem_create(cfg.get(), problem.out()), "building problem");
      const auto dir = output_dir(truth_opts, cfg, "truth");
      check(dsmc_problem_export(problem.get(), dir.c_str()), "exporting problem");
      std::printf("%s\n", dir.c_str());
    } else if (*smc_cmd) {
      Config cfg;
      std::vector<std::pair<std::string, std::string>> extra;
      if (particles) extra.emplace_back("smc.particles", std::to_string(*particles));
      load_config(smc_opts, cfg, extra);
      ProblemH problem;
      check(dsmc_problem_create(cfg.get(), problem.out()), "building problem");
      ReferenceH reference;
      if (!smc_reference.empty())
        check(dsmc_reference_load(problem.get(), smc_reference.c_str(), reference.out()), "loading reference");
      const auto name = "run_" + config_value(cfg, "model") + "_" + method + "_J" +
                        config_value(cfg, "smc.particles") + "_s" + config_value(cfg, "seed");
      const auto dir = output_dir(smc_opts, cfg, name);
      RunH run;
      const auto st = dsmc_run_smc(problem.get(), parse_method(method), 0, nullptr, print_iteration, nullptr, run.out());
      const std::string run_error = st == DSMC_OK ? "" : dsmc_last_error();
      if (run.get()) check(dsmc_run_export(run.get(), reference.get(), dir.c_str()), "exporting run");
      if (st != DSMC_OK) throw Failure(std::string("run failed: ") + dsmc_status_string(st) + ": " + run_error);
      std::printf("%s\n", dir.c_str());
    } else if (*ref_cmd) {
      Config cfg;
      load_config(ref_opts, cfg);
      ProblemH problem;
      check(dsmc_problem_create(cfg.get(), problem.out()), "building problem");
      ReferenceH reference;
      check(dsmc_reference_run(problem.get(), nullptr, reference.out()), "running reference chains");
      const auto dir = output_dir(ref_opts, cfg, "reference_" + config_value(cfg, "model"));
      check(dsmc_reference_export(reference.get(), dir.c_str()), "exporting reference");
      std::printf("%s\n", dir.c_str());
    } else if (*sweep_cmd) {
      Config cfg;
      load_config(sweep_opts, cfg);
      ProblemH problem;
      check(dsmc_problem_create(cfg.get(), problem.out()), "building problem");
      const auto dir = output_dir(sweep_opts, cfg, "sweep_" + config_value(cfg, "model"));
      ReferenceH reference;
      if (!sweep_reference.empty()) {
        check(dsmc_reference_load(problem.get(), sweep_reference.c_str(), reference.out()), "loading reference");
      } else {
        std::fprintf(stderr, "running reference chains\n");
        check(dsmc_reference_run(problem.get(), nullptr, reference.out()), "running reference chains");
        check(dsmc_reference_export(reference.get(), (std::filesystem::path(dir) / "reference").string().c_str()),
              "exporting reference");
      }
      SweepH sweep;
      check(dsmc_sweep_run(problem.get(), reference.get(), print_sweep_row, nullptr, sweep.out()), "running sweep");
      check(dsmc_sweep_export(sweep.get(), dir.c_str()), "exporting sweep");
      std::printf("%s\n", dir.c_str());
    } else if (*metrics_cmd) {
      Config cfg;
      load_config(metrics_opts, cfg);
      ProblemH problem;
      check(dsmc_problem_create(cfg.get(), problem.out()), "building problem");
      const std::string out_csv =
          metrics_opts.out.empty()
              ? (std::filesystem::path(ensemble_csv).parent_path() / "metrics_offline.csv").string()
              : metrics_opts.out;
      dsmc_metrics m{};
      check(dsmc_metrics_from_files(problem.get(), ensemble_csv.c_str(), metrics_reference.c_str(), out_csv.c_str(), &m),
            "computing metrics");
      dsmc_model model{};
      check(dsmc_config_model(cfg.get(), &model), "reading model");
      if (model == DSMC_MODEL_P1) {
        std::printf("error_field %.10g\n", m.error_field);
      } else {
        std::printf("error_outside %.10g\nerror_inside %.10g\n", m.error_outside, m.error_inside);
        for (int i = 0; i < 5; ++i) std::printf("kl_d%d %.10g\n", i + 1, m.kl[i]);
      }
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "dsmc: %s\n", e.what());
    return 1;
  }
  return 0;
}
