#pragma once

#include "config.hpp"
#include "metrics.hpp"
#include "permeability.hpp"
#include "reference.hpp"
#include "smc.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsmc::io {

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma separated; fields containing commas, quotes or newlines are quoted.
void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

/// Column names of a flattened parameter: u_k for P1; d1..d5, u1_k, u2_k for P2.
std::vector<std::string> flat_header(const Parameter& shape);

/// One row per column of `flat`.
void write_matrix(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& flat);
/// Inverse of write_matrix: column j of the result is row j of the file.
Eigen::MatrixXd read_matrix(const std::string& path, std::vector<std::string>* header = nullptr);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// One JSON object per tempering iteration.
std::string run_jsonl(const smc::RunRecord& record);

/// A row of metrics.csv.
struct MetricsRow {
  Method method = Method::Monomial;
  int particles = 0;
  std::uint64_t seed = 0;
  bool completed = false;
  int iterations = 0;
  double seconds = 0.0;
  std::optional<metrics::RunMetrics> metrics;
  std::string error;
};

Table metrics_table(ModelKind model, const std::vector<MetricsRow>& rows);

/// Histogram of one geometric coordinate for the approximation and the reference.
Table marginal_table(const Eigen::VectorXd& approx, const Eigen::VectorXd& reference, const metrics::HistogramSpec& spec);

/// Writes run.jsonl, ensemble_final.csv, metrics.csv, config.resolved.json
/// and, for P2 with a reference, marginal_d1.csv ... marginal_d5.csv.
void export_results(const std::string& dir, const RunConfig& cfg, const smc::RunResult& run,
                    const smc::ReferenceArchive* reference);

/// reference_samples.csv (chain, step, coordinates) and, for P2, trace_d1.csv ... trace_d5.csv.
void export_reference(const std::string& dir, const RunConfig& cfg, const smc::ReferenceArchive& reference);
smc::ReferenceArchive read_reference(const std::string& dir, const Parameter& shape);

/// truth_fine.csv, truth.csv (coarse), observations.csv and config.resolved.json.
void export_problem(const std::string& dir, const Problem& problem);

std::string create_directory(const std::string& dir);

}  // namespace dsmc::io
