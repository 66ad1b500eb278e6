#include "io.hpp"

#include "error.hpp"
#include "resampling.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dsmc::io {

namespace {

using Json = nlohmann::ordered_json;

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record starting at `pos`; handles quoted fields with embedded newlines.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          cur += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return true;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorKind::Io,
          "cannot parse number '" + std::string(s) + "'");
  return v;
}

std::string create_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
  return dir;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path + " for writing");
  out << text;
  out.close();
  require(static_cast<bool>(out), ErrorKind::Io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_table(const std::string& path, const Table& table) {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += quote(fields[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  write_text(path, out);
}

Table read_table(const std::string& path) {
  const auto text = read_text(path);
  Table t;
  std::size_t pos = 0;
  std::vector<std::string> fields;
  require(next_record(text, pos, fields), ErrorKind::Io, "empty CSV file " + path);
  t.header = fields;
  while (next_record(text, pos, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    require(fields.size() == t.header.size(), ErrorKind::Io,
            path + ": row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(fields.size()) +
                " fields, expected " + std::to_string(t.header.size()));
    t.rows.push_back(fields);
  }
  return t;
}

std::vector<std::string> flat_header(const Parameter& shape) {
  std::vector<std::string> h;
  const int n = shape.grid().size();
  if (shape.model() == ModelKind::P1) {
    for (int k = 0; k < n; ++k) h.push_back("u_" + std::to_string(k));
    return h;
  }
  for (int i = 1; i <= 5; ++i) h.push_back("d" + std::to_string(i));
  for (int k = 0; k < n; ++k) h.push_back("u1_" + std::to_string(k));
  for (int k = 0; k < n; ++k) h.push_back("u2_" + std::to_string(k));
  return h;
}

void write_matrix(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& flat) {
  require(static_cast<Eigen::Index>(header.size()) == flat.rows(), ErrorKind::Dimension,
          "write_matrix: header does not match the row dimension");
  Table t{header, {}};
  t.rows.reserve(static_cast<std::size_t>(flat.cols()));
  for (Eigen::Index j = 0; j < flat.cols(); ++j) {
    std::vector<std::string> r;
    r.reserve(header.size());
    for (Eigen::Index i = 0; i < flat.rows(); ++i) r.push_back(format_double(flat(i, j)));
    t.rows.push_back(std::move(r));
  }
  write_table(path, t);
}

Eigen::MatrixXd read_matrix(const std::string& path, std::vector<std::string>* header) {
  const auto t = read_table(path);
  Eigen::MatrixXd flat(static_cast<Eigen::Index>(t.header.size()), static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t j = 0; j < t.rows.size(); ++j)
    for (std::size_t i = 0; i < t.header.size(); ++i)
      flat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(t.rows[j][i]);
  if (header) *header = t.header;
  return flat;
}

std::string run_jsonl(const smc::RunRecord& rec) {
  std::string out;
  for (const auto& it : rec.iterations) {
    Json j{
        {"iteration", it.iteration},
        {"method", to_string(rec.method)},
        {"model", to_string(rec.model)},
        {"particles", rec.particles},
        {"seed", rec.seed},
        {"config_hash", rec.config_hash},
        {"phi", it.phi},
        {"ess", it.ess},
        {"log_increment", it.log_increment},
        {"bisection_iterations", it.bisection_iterations},
        {"acceptance", {number_or_null(it.acceptance[0]), number_or_null(it.acceptance[1]),
                        number_or_null(it.acceptance[2])}},
        {"beta", it.kernel.beta},
        {"beta_outside", it.kernel.beta_outside},
        {"geom_step", it.kernel.geom_step},
        {"transport_pivots", it.transport_pivots},
        {"seconds", it.seconds},
    };
    out += j.dump();
    out += '\n';
  }
  return out;
}

Table metrics_table(ModelKind model, const std::vector<MetricsRow>& rows) {
  Table t;
  t.header = {"method", "particles", "seed", "status", "iterations", "seconds"};
  if (model == ModelKind::P1) {
    t.header.push_back("error_field");
  } else {
    for (const char* c : {"error_outside", "error_inside", "kl_d1", "kl_d2", "kl_d3", "kl_d4", "kl_d5"})
      t.header.push_back(c);
  }
  t.header.push_back("message");
  for (const auto& r : rows) {
    std::vector<std::string> f{to_string(r.method), std::to_string(r.particles), std::to_string(r.seed),
                               r.completed ? "ok" : "failed", std::to_string(r.iterations),
                               format_double(r.seconds)};
    const auto cell = [&](double v) { f.push_back(r.metrics ? format_double(v) : std::string()); };
    const metrics::RunMetrics m = r.metrics.value_or(metrics::RunMetrics{});
    if (model == ModelKind::P1) {
      cell(m.error_field);
    } else {
      cell(m.error_outside);
      cell(m.error_inside);
      for (double kl : m.kl) cell(kl);
    }
    f.push_back(r.error);
    t.rows.push_back(std::move(f));
  }
  return t;
}

Table marginal_table(const Eigen::VectorXd& approx, const Eigen::VectorXd& reference,
                     const metrics::HistogramSpec& spec) {
  const auto p = metrics::histogram(approx, Eigen::VectorXd::Ones(approx.size()), spec);
  const auto p_ref = metrics::histogram(reference, Eigen::VectorXd::Ones(reference.size()), spec);
  Table t{{"bin_lo", "bin_hi", "approx", "reference"}, {}};
  const double width = spec.range.width() / spec.bins;
  for (int b = 0; b < spec.bins; ++b)
    t.rows.push_back({format_double(spec.range.lo + b * width), format_double(spec.range.lo + (b + 1) * width),
                      format_double(p[b]), format_double(p_ref[b])});
  return t;
}

void export_results(const std::string& dir, const RunConfig& cfg, const smc::RunResult& run,
                    const smc::ReferenceArchive* reference) {
  create_directory(dir);
  write_text(path_join(dir, "config.resolved.json"), to_json(cfg));
  write_text(path_join(dir, "run.jsonl"), run_jsonl(run.record));

  MetricsRow row;
  row.method = run.record.method;
  row.particles = run.record.particles;
  row.seed = run.record.seed;
  row.completed = run.record.completed;
  row.iterations = static_cast<int>(run.record.iterations.size());
  row.seconds = run.record.seconds;
  row.error = run.record.error;

  if (!run.ensemble.particles.empty()) {
    const auto flat = run.ensemble.flat();
    const auto& shape = run.ensemble.particles.front().u;
    write_matrix(path_join(dir, "ensemble_final.csv"), flat_header(shape), flat);
    if (reference && reference->size() > 0 && run.record.completed) {
      const int bins = cfg.bins_for(run.record.particles);
      row.metrics = metrics::compare(flat, reference->samples, shape, cfg.prior.bounds, bins);
      if (cfg.model == ModelKind::P2) {
        for (int i = 0; i < 5; ++i) {
          const metrics::HistogramSpec spec{bins, cfg.prior.bounds[static_cast<std::size_t>(i)]};
          write_table(path_join(dir, "marginal_d" + std::to_string(i + 1) + ".csv"),
                      marginal_table(flat.row(i).transpose(), reference->samples.row(i).transpose(), spec));
        }
      }
    }
  }
  write_table(path_join(dir, "metrics.csv"), metrics_table(cfg.model, {row}));
}

void export_reference(const std::string& dir, const RunConfig& cfg, const smc::ReferenceArchive& reference) {
  create_directory(dir);
  write_text(path_join(dir, "config.resolved.json"), to_json(cfg));
  Table t;
  t.header = {"chain", "step"};
  for (auto& h : flat_header(reference.shape)) t.header.push_back(std::move(h));
  for (Eigen::Index s = 0; s < reference.size(); ++s) {
    std::vector<std::string> r{std::to_string(reference.chain[static_cast<std::size_t>(s)]),
                               std::to_string(reference.step[static_cast<std::size_t>(s)])};
    for (Eigen::Index i = 0; i < reference.samples.rows(); ++i) r.push_back(format_double(reference.samples(i, s)));
    t.rows.push_back(std::move(r));
  }
  write_table(path_join(dir, "reference_samples.csv"), t);

  Table acc{{"chain", "rate_0", "rate_1", "rate_2"}, {}};
  for (std::size_t c = 0; c < reference.acceptance.size(); ++c) {
    const auto& a = reference.acceptance[c];
    acc.rows.push_back({std::to_string(c), format_double(a.rate(0)), format_double(a.rate(1)), format_double(a.rate(2))});
  }
  write_table(path_join(dir, "reference_acceptance.csv"), acc);

  if (reference.model != ModelKind::P2) return;
  for (int i = 0; i < 5; ++i) {
    Table tr{{"chain", "step", "value"}, {}};
    for (std::size_t c = 0; c < reference.geometry_trace.size(); ++c) {
      const auto& trace = reference.geometry_trace[c];
      for (Eigen::Index s = 0; s < trace.cols(); ++s)
        tr.rows.push_back({std::to_string(c), std::to_string(cfg.reference.burn_in + s + 1), format_double(trace(i, s))});
    }
    write_table(path_join(dir, "trace_d" + std::to_string(i + 1) + ".csv"), tr);
  }
}

smc::ReferenceArchive read_reference(const std::string& dir, const Parameter& shape) {
  const auto path = path_join(dir, "reference_samples.csv");
  const auto t = read_table(path);
  const auto expected = flat_header(shape);
  require(t.header.size() == expected.size() + 2, ErrorKind::Dimension,
          path + ": column count does not match the model");
  smc::ReferenceArchive a;
  a.model = shape.model();
  a.shape = shape;
  a.samples.resize(static_cast<Eigen::Index>(expected.size()), static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t s = 0; s < t.rows.size(); ++s) {
    a.chain.push_back(static_cast<int>(parse_double(t.rows[s][0])));
    a.step.push_back(static_cast<long>(parse_double(t.rows[s][1])));
    for (std::size_t i = 0; i < expected.size(); ++i)
      a.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = parse_double(t.rows[s][i + 2]);
  }
  return a;
}

void export_problem(const std::string& dir, const Problem& problem) {
  create_directory(dir);
  write_text(path_join(dir, "config.resolved.json"), to_json(problem.config));
  write_matrix(path_join(dir, "truth_fine.csv"), flat_header(problem.truth),
               resampling::flatten(problem.truth));
  write_matrix(path_join(dir, "truth.csv"), flat_header(problem.truth_coarse),
               resampling::flatten(problem.truth_coarse));
  Table obs{{"x1", "x2", "y", "sigma", "eps"}, {}};
  for (std::size_t m = 0; m < problem.data.locations.size(); ++m) {
    const auto& p = problem.data.locations[m];
    obs.rows.push_back({format_double(p.x1), format_double(p.x2),
                        format_double(problem.data.y[static_cast<Eigen::Index>(m)]), format_double(problem.data.sigma),
                        format_double(problem.data.eps)});
  }
  write_table(path_join(dir, "observations.csv"), obs);
}

}  // namespace dsmc::io
