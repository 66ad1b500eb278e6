#include "metrics.hpp"

#include "darcy.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace dsmc::metrics {

double mean_error(const GridField& a, const GridField& b) {
  require(a.grid == b.grid, ErrorKind::Dimension, "mean_error: grid mismatch");
  return darcy::l2_norm(GridField(a.grid, a.values - b.values));
}

Eigen::VectorXd histogram(const Eigen::VectorXd& samples, const Eigen::VectorXd& weights, const HistogramSpec& spec) {
  require(spec.bins >= 2, ErrorKind::InvalidArgument, "histogram needs at least 2 bins");
  require(spec.range.hi > spec.range.lo, ErrorKind::InvalidArgument, "histogram range is empty");
  require(samples.size() == weights.size() && samples.size() > 0, ErrorKind::Dimension,
          "histogram: samples and weights must be nonempty and of equal length");
  Eigen::VectorXd h = Eigen::VectorXd::Zero(spec.bins);
  const double scale = spec.bins / spec.range.width();
  for (Eigen::Index s = 0; s < samples.size(); ++s) {
    const double pos = std::floor((samples[s] - spec.range.lo) * scale);
    const auto b = static_cast<Eigen::Index>(std::clamp(pos, 0.0, static_cast<double>(spec.bins - 1)));
    h[b] += weights[s];
  }
  const double total = h.sum();
  require(total > 0, ErrorKind::InvalidArgument, "histogram: weights sum to zero");
  return h / total;
}

double kl_marginal(const Eigen::VectorXd& reference, const Eigen::VectorXd& approx, const Eigen::VectorXd& weights,
                   const HistogramSpec& spec) {
  const Eigen::VectorXd uniform = Eigen::VectorXd::Ones(reference.size());
  Eigen::VectorXd p_ref = histogram(reference, uniform, spec).array() + kBinFloor;
  Eigen::VectorXd p = histogram(approx, weights, spec).array() + kBinFloor;
  p_ref /= p_ref.sum();
  p /= p.sum();
  double kl = 0.0;
  for (Eigen::Index b = 0; b < p.size(); ++b) kl += p_ref[b] * std::log(p_ref[b] / p[b]);
  return kl;
}

GridField mean_field(const std::vector<GridField>& fields) {
  require(!fields.empty(), ErrorKind::InvalidArgument, "mean_field: no fields");
  GridField out(fields.front().grid);
  for (const auto& f : fields) {
    require(f.grid == out.grid, ErrorKind::Dimension, "mean_field: grid mismatch");
    out.values += f.values;
  }
  out.values /= static_cast<double>(fields.size());
  return out;
}

GridField ensemble_variance_field(const std::vector<GridField>& fields) {
  require(fields.size() >= 2, ErrorKind::InvalidArgument, "ensemble_variance_field needs at least 2 fields");
  const auto mean = mean_field(fields);
  GridField out(mean.grid);
  for (const auto& f : fields) out.values.array() += (f.values - mean.values).array().square();
  out.values /= static_cast<double>(fields.size() - 1);
  return out;
}

double percentile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorKind::InvalidArgument, "percentile of an empty set");
  require(q >= 0 && q <= 100, ErrorKind::InvalidArgument, "percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

int count_modes(const Eigen::VectorXd& h) {
  const Eigen::Index n = h.size();
  require(n >= 1, ErrorKind::InvalidArgument, "count_modes: empty histogram");
  Eigen::VectorXd s(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, b - 1);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, b + 1);
    s[b] = h.segment(lo, hi - lo + 1).mean();
  }
  int modes = 0;
  for (Eigen::Index b = 0; b < n;) {
    Eigen::Index e = b;
    while (e + 1 < n && s[e + 1] == s[b]) ++e;
    const bool left = b == 0 || s[b - 1] < s[b];
    const bool right = e == n - 1 || s[e + 1] < s[b];
    if (left && right) ++modes;
    b = e + 1;
  }
  return modes;
}

namespace {

GridField block_mean(const Eigen::MatrixXd& flat, Eigen::Index offset, const Grid& grid) {
  return GridField(grid, flat.middleRows(offset, grid.size()).rowwise().mean());
}

}  // namespace

RunMetrics compare(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Parameter& shape,
                   const prior::GeometryBounds& bounds, int bins) {
  require(approx.rows() == reference.rows(), ErrorKind::Dimension, "compare: dimension mismatch");
  require(approx.cols() > 0 && reference.cols() > 0, ErrorKind::InvalidArgument, "compare: empty sample set");
  const Grid& grid = shape.grid();
  RunMetrics m;
  if (shape.model() == ModelKind::P1) {
    m.error_field = mean_error(block_mean(approx, 0, grid), block_mean(reference, 0, grid));
    return m;
  }
  m.error_inside = mean_error(block_mean(approx, 5, grid), block_mean(reference, 5, grid));
  m.error_outside = mean_error(block_mean(approx, 5 + grid.size(), grid), block_mean(reference, 5 + grid.size(), grid));
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(approx.cols());
  for (int i = 0; i < 5; ++i) {
    const HistogramSpec spec{bins, bounds[static_cast<std::size_t>(i)]};
    m.kl[static_cast<std::size_t>(i)] = kl_marginal(reference.row(i).transpose(), approx.row(i).transpose(), w, spec);
  }
  return m;
}

}  // namespace dsmc::metrics
