#include "sweep.hpp"

#include <filesystem>
#include <algorithm>

namespace dsmc::sweep {

SweepResult run_experiment_sweep(const Problem& problem, const smc::ReferenceArchive* reference,
                                 const SweepOptions& options) {
  const auto& cfg = problem.config;
  SweepResult out;
  smc::RunOptions run_opts;
  run_opts.threads = options.threads;
  for (int j : cfg.sweep_sizes) {
    for (Method method : cfg.sweep_methods) {
      for (std::uint64_t seed : cfg.sweep_seeds) {
        io::MetricsRow row;
        row.method = method;
        row.particles = j;
        row.seed = seed;
        smc::RunRecord record;
        try {
          const auto run = smc::run_smc(problem, method, j, seed, run_opts);
          record = run.record;
          row.completed = run.record.completed;
          row.iterations = static_cast<int>(run.record.iterations.size());
          row.seconds = run.record.seconds;
          row.error = run.record.error;
          if (row.completed && reference && reference->size() > 0) {
            const auto& shape = run.ensemble.particles.front().u;
            row.metrics = metrics::compare(run.ensemble.flat(), reference->samples, shape, cfg.prior.bounds,
                                           cfg.bins_for(j));
          }
        } catch (const std::exception& e) {
          row.completed = false;
          row.error = e.what();
        }
        if (options.on_run) options.on_run(row);
        out.rows.push_back(std::move(row));
        out.records.push_back(std::move(record));
      }
    }
  }
  out.summary = summarize(cfg.model, out.rows);
  return out;
}

std::vector<SummaryRow> summarize(ModelKind model, const std::vector<io::MetricsRow>& rows) {
  std::vector<std::pair<std::string, double metrics::RunMetrics::*>> fields;
  if (model == ModelKind::P1) {
    fields = {{"error_field", &metrics::RunMetrics::error_field}};
  } else {
    fields = {{"error_outside", &metrics::RunMetrics::error_outside},
              {"error_inside", &metrics::RunMetrics::error_inside}};
  }
  std::vector<std::pair<Method, int>> keys;
  for (const auto& r : rows) {
    const std::pair key{r.method, r.particles};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<SummaryRow> out;
  const auto add = [&](Method m, int j, const std::string& name, const std::vector<double>& v) {
    if (v.empty()) return;
    out.push_back({m, j, name, static_cast<int>(v.size()), metrics::percentile(v, 50), metrics::percentile(v, 25),
                   metrics::percentile(v, 75)});
  };
  for (const auto& [m, j] : keys) {
    std::vector<const io::MetricsRow*> cell;
    for (const auto& r : rows)
      if (r.method == m && r.particles == j && r.completed && r.metrics) cell.push_back(&r);
    for (const auto& [name, ptr] : fields) {
      std::vector<double> v;
      for (const auto* r : cell) v.push_back((*r->metrics).*ptr);
      add(m, j, name, v);
    }
    if (model == ModelKind::P2) {
      for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> v;
        for (const auto* r : cell) v.push_back(r->metrics->kl[i]);
        add(m, j, "kl_d" + std::to_string(i + 1), v);
      }
    }
    std::vector<double> iters;
    for (const auto& r : rows)
      if (r.method == m && r.particles == j && r.completed) iters.push_back(r.iterations);
    add(m, j, "iterations", iters);
  }
  return out;
}

io::Table summary_table(const std::vector<SummaryRow>& summary) {
  io::Table t{{"method", "particles", "metric", "count", "median", "p25", "p75"}, {}};
  for (const auto& s : summary)
    t.rows.push_back({to_string(s.method), std::to_string(s.particles), s.metric, std::to_string(s.count),
                      io::format_double(s.median), io::format_double(s.p25), io::format_double(s.p75)});
  return t;
}

void export_sweep(const std::string& dir, const RunConfig& cfg, const SweepResult& result) {
  io::create_directory(dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  io::write_text(path("config.resolved.json"), to_json(cfg));
  io::write_table(path("metrics.csv"), io::metrics_table(cfg.model, result.rows));
  io::write_table(path("summary.csv"), summary_table(result.summary));
  std::string log;
  for (const auto& r : result.records) log += io::run_jsonl(r);
  io::write_text(path("runs.jsonl"), log);
}

}  // namespace dsmc::sweep
