#pragma once

#include "io.hpp"
#include "reference.hpp"
#include "smc.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dsmc::sweep {

struct SummaryRow {
  Method method = Method::Monomial;
  int particles = 0;
  std::string metric;
  int count = 0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

struct SweepResult {
  std::vector<io::MetricsRow> rows;
  std::vector<smc::RunRecord> records;
  std::vector<SummaryRow> summary;
};

struct SweepOptions {
  int threads = 1;
  std::function<void(const io::MetricsRow&)> on_run;
};

/// Runs every (size, method, seed) combination of the configured sweep.
/// A failing run is recorded in its row and the sweep continues. Metrics
/// need a reference; without one only run statistics are filled in.
SweepResult run_experiment_sweep(const Problem& problem, const smc::ReferenceArchive* reference,
                                 const SweepOptions& options = {});

/// Median and quartiles of each metric over the completed runs of every
/// (method, size) pair.
std::vector<SummaryRow> summarize(ModelKind model, const std::vector<io::MetricsRow>& rows);

io::Table summary_table(const std::vector<SummaryRow>& summary);

/// metrics.csv, summary.csv, runs.jsonl and config.resolved.json.
void export_sweep(const std::string& dir, const RunConfig& cfg, const SweepResult& result);

}  // namespace dsmc::sweep
