#include "resampling.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dsmc::resampling {

std::vector<int> multinomial_resample(const Eigen::VectorXd& w, Rng& rng) {
  const auto n = static_cast<int>(w.size());
  require(n > 0, ErrorKind::InvalidArgument, "multinomial_resample: empty weight vector");
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    require(w[j] >= 0.0, ErrorKind::InvalidArgument, "multinomial_resample: negative weight");
    total += w[j];
    cumulative[j] = total;
  }
  require(total > 0.0, ErrorKind::InvalidArgument, "multinomial_resample: weights sum to zero");
  std::uniform_real_distribution<double> uniform(0.0, total);
  std::vector<int> out(n);
  for (int j = 0; j < n; ++j) {
    const double u = uniform(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out[j] = it == cumulative.end() ? n - 1 : static_cast<int>(it - cumulative.begin());
  }
  return out;
}

int flat_dimension(const Parameter& shape) {
  const int cells = shape.grid().size();
  return shape.model() == ModelKind::P1 ? cells : 5 + 2 * cells;
}

Eigen::VectorXd flatten(const Parameter& u) {
  if (u.model() == ModelKind::P1) return u.field().logk.values;
  const auto& c = u.channel();
  const Eigen::Index n = c.inside.values.size();
  Eigen::VectorXd x(5 + 2 * n);
  for (int i = 0; i < 5; ++i) x[i] = c.geom.d[i];
  x.segment(5, n) = c.inside.values;
  x.segment(5 + n, n) = c.outside.values;
  return x;
}

Parameter unflatten(const Eigen::VectorXd& x, const Parameter& shape) {
  require(x.size() == flat_dimension(shape), ErrorKind::Dimension, "unflatten: coordinate vector has wrong length");
  const Grid& g = shape.grid();
  if (shape.model() == ModelKind::P1) return FieldParameter{GridField(g, x)};
  const Eigen::Index n = g.size();
  ChannelParameter c;
  for (int i = 0; i < 5; ++i) c.geom.d[i] = x[i];
  c.inside = GridField(g, x.segment(5, n));
  c.outside = GridField(g, x.segment(5 + n, n));
  return c;
}

Eigen::MatrixXd flatten_ensemble(const std::vector<Parameter>& particles) {
  require(!particles.empty(), ErrorKind::InvalidArgument, "flatten_ensemble: empty ensemble");
  Eigen::MatrixXd flat(flat_dimension(particles.front()), static_cast<Eigen::Index>(particles.size()));
  for (std::size_t j = 0; j < particles.size(); ++j) {
    Eigen::VectorXd x = flatten(particles[j]);
    require(x.size() == flat.rows(), ErrorKind::Dimension, "flatten_ensemble: particles differ in dimension");
    flat.col(static_cast<Eigen::Index>(j)) = x;
  }
  return flat;
}

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& flat) {
  const Eigen::Index n = flat.cols();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) d(i, j) = d(j, i) = (flat.col(i) - flat.col(j)).squaredNorm();
  return d;
}

namespace {

// Bipartite transportation network: supply nodes 0..J-1 (weights), demand
// nodes J..2J-1 (uniform 1/J), artificial root 2J. Real arc a = i * J + j
// runs i -> J + j. Artificial arc arc_num + u joins u with the root.
class NetworkSimplex {
 public:
  NetworkSimplex(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w)
      : cost_(cost),
        n_(static_cast<int>(w.size())),
        nodes_(2 * n_),
        root_(2 * n_),
        arc_num_(static_cast<long>(n_) * n_),
        flow_(static_cast<std::size_t>(arc_num_ + nodes_), 0.0),
        state_(static_cast<std::size_t>(arc_num_), kLower),
        art_up_(static_cast<std::size_t>(nodes_)),
        art_cost_(static_cast<std::size_t>(nodes_)),
        tree_(static_cast<std::size_t>(nodes_)),
        slot_(static_cast<std::size_t>(arc_num_ + nodes_), -1),
        pi_(static_cast<std::size_t>(nodes_ + 1)),
        parent_(static_cast<std::size_t>(nodes_ + 1)),
        pred_(static_cast<std::size_t>(nodes_ + 1)),
        dir_(static_cast<std::size_t>(nodes_ + 1)),
        depth_(static_cast<std::size_t>(nodes_ + 1)),
        adj_start_(static_cast<std::size_t>(nodes_ + 2)),
        adj_(static_cast<std::size_t>(2 * nodes_)) {
    const double max_cost = std::max(0.0, cost.maxCoeff());
    const double art = (max_cost + 1.0) * (nodes_ + 1);
    tolerance_ = 1e-13 * art;
    const double target = 1.0 / n_;
    for (int u = 0; u < nodes_; ++u) {
      const double supply = u < n_ ? w[u] : -target;
      const long a = arc_num_ + u;
      if (supply > 0.0) {
        art_up_[u] = true;
        art_cost_[u] = 0.0;
        flow_[a] = supply;
      } else {
        // zero-supply nodes hang below the root so the tree stays strongly feasible
        art_up_[u] = false;
        art_cost_[u] = art;
        flow_[a] = -supply;
      }
      tree_[u] = a;
      slot_[a] = u;
    }
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(arc_num_))));
    rebuild();
  }

  void run() {
    const long max_pivots = 50 * (arc_num_ + nodes_) + 1000;
    long in = -1;
    while (find_entering(in)) {
      pivot(in);
      require(++pivots_ <= max_pivots, ErrorKind::Numerical, "network simplex exceeded its pivot limit");
    }
  }

  [[nodiscard]] TransportPlan plan() const {
    TransportPlan p;
    p.coupling.resize(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) p.coupling(i, j) = flow_[static_cast<std::size_t>(i) * n_ + j];
    p.cost = (p.coupling.array() * cost_.array()).sum();
    p.pivots = pivots_;
    return p;
  }

  [[nodiscard]] double artificial_flow() const {
    double s = 0.0;
    for (int u = 0; u < nodes_; ++u) s += flow_[arc_num_ + u];
    return s;
  }

 private:
  static constexpr signed char kLower = 1;
  static constexpr signed char kTree = 0;

  [[nodiscard]] int source(long a) const {
    if (a < arc_num_) return static_cast<int>(a / n_);
    const int u = static_cast<int>(a - arc_num_);
    return art_up_[u] ? u : root_;
  }
  [[nodiscard]] int target(long a) const {
    if (a < arc_num_) return n_ + static_cast<int>(a % n_);
    const int u = static_cast<int>(a - arc_num_);
    return art_up_[u] ? root_ : u;
  }
  [[nodiscard]] double cost(long a) const {
    if (a < arc_num_) return cost_(a / n_, a % n_);
    return art_cost_[a - arc_num_];
  }

  // Parent pointers, depths and potentials from the current tree arcs.
  void rebuild() {
    std::fill(adj_start_.begin(), adj_start_.end(), 0);
    for (long a : tree_) {
      ++adj_start_[source(a) + 1];
      ++adj_start_[target(a) + 1];
    }
    for (int u = 0; u <= nodes_; ++u) adj_start_[u + 1] += adj_start_[u];
    std::vector<int> fill(adj_start_.begin(), adj_start_.end() - 1);
    for (long a : tree_) {
      adj_[fill[source(a)]++] = a;
      adj_[fill[target(a)]++] = a;
    }
    parent_[root_] = -1;
    pred_[root_] = -1;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    queue_.assign(1, root_);
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const int u = queue_[head];
      for (int k = adj_start_[u]; k < adj_start_[u + 1]; ++k) {
        const long a = adj_[k];
        if (a == pred_[u]) continue;
        const bool down = source(a) == u;
        const int v = down ? target(a) : source(a);
        parent_[v] = u;
        pred_[v] = a;
        dir_[v] = down ? -1 : 1;
        depth_[v] = depth_[u] + 1;
        // zero reduced cost on tree arcs: c + pi_s - pi_t = 0
        pi_[v] = down ? pi_[u] + cost(a) : pi_[u] - cost(a);
        queue_.push_back(v);
      }
    }
    require(static_cast<int>(queue_.size()) == nodes_ + 1, ErrorKind::Numerical,
            "network simplex basis is not a spanning tree");
  }

  bool find_entering(long& in) {
    double best = -tolerance_;
    long count = block_;
    long e = next_arc_;
    bool found = false;
    for (long scanned = 0; scanned < arc_num_; ++scanned) {
      if (state_[e] != kTree) {
        const double c = state_[e] * (cost(e) + pi_[source(e)] - pi_[target(e)]);
        if (c < best) {
          best = c;
          in = e;
          found = true;
        }
      }
      if (++e == arc_num_) e = 0;
      if (--count == 0) {
        if (found) break;
        count = block_;
      }
    }
    next_arc_ = e;
    return found;
  }

  void pivot(long in) {
    const int first = source(in);
    const int second = target(in);
    int u = first;
    int v = second;
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    const int join = u;

    // Leaving arc: last blocking arc met when traversing the cycle in the
    // direction of the entering arc, starting from the join node.
    double delta = std::numeric_limits<double>::infinity();
    int u_out = -1;
    for (int x = first; x != join; x = parent_[x]) {
      if (dir_[x] == 1 && flow_[pred_[x]] < delta) {
        delta = flow_[pred_[x]];
        u_out = x;
      }
    }
    for (int x = second; x != join; x = parent_[x]) {
      if (dir_[x] == -1 && flow_[pred_[x]] <= delta) {
        delta = flow_[pred_[x]];
        u_out = x;
      }
    }
    require(u_out >= 0, ErrorKind::Numerical, "transport problem is unbounded");

    if (delta > 0.0) {
      flow_[in] += delta;
      for (int x = first; x != join; x = parent_[x]) flow_[pred_[x]] -= dir_[x] * delta;
      for (int x = second; x != join; x = parent_[x]) flow_[pred_[x]] += dir_[x] * delta;
    }
    const long out = pred_[u_out];
    flow_[out] = 0.0;
    state_[in] = kTree;
    if (out < arc_num_) state_[out] = kLower;
    const int s = slot_[out];
    slot_[out] = -1;
    tree_[s] = in;
    slot_[in] = s;
    rebuild();
  }

  const Eigen::MatrixXd& cost_;
  int n_;
  int nodes_;
  int root_;
  long arc_num_;
  std::vector<double> flow_;
  std::vector<signed char> state_;
  std::vector<bool> art_up_;
  std::vector<double> art_cost_;
  std::vector<long> tree_;
  std::vector<int> slot_;
  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<signed char> dir_;
  std::vector<int> depth_;
  std::vector<int> adj_start_;
  std::vector<long> adj_;
  std::vector<int> queue_;
  double tolerance_ = 0.0;
  long block_ = 10;
  long next_arc_ = 0;
  long pivots_ = 0;
};

}  // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w) {
  const Eigen::Index n = w.size();
  require(n >= 1, ErrorKind::InvalidArgument, "solve_transport: empty weight vector");
  require(cost.rows() == n && cost.cols() == n, ErrorKind::Dimension, "solve_transport: cost matrix must be J x J");
  require((w.array() >= 0.0).all(), ErrorKind::Contract, "solve_transport: negative weight");
  require(std::abs(w.sum() - 1.0) <= 1e-9, ErrorKind::Contract,
          "solve_transport: weights are not normalised (sum " + std::to_string(w.sum()) + ")");
  require(cost.allFinite() && (cost.array() >= 0.0).all(), ErrorKind::InvalidArgument,
          "solve_transport: costs must be finite and nonnegative");
  NetworkSimplex simplex(cost, w);
  simplex.run();
  require(simplex.artificial_flow() <= 1e-9, ErrorKind::Contract, "solve_transport: marginals are infeasible");
  return simplex.plan();
}

Eigen::MatrixXd transform_ensemble(const Eigen::MatrixXd& flat, const TransportPlan& plan) {
  require(plan.coupling.rows() == flat.cols() && plan.coupling.cols() == flat.cols(), ErrorKind::Dimension,
          "transform_ensemble: plan size does not match the ensemble");
  Eigen::MatrixXd p = plan.coupling;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double s = p.col(j).sum();
    require(s > 0.0, ErrorKind::Contract, "transform_ensemble: empty plan column");
    p.col(j) /= s;
  }
  return flat * p;
}

}  // namespace dsmc::resampling
