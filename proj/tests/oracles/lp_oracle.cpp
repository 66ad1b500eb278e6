#include "lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

namespace {

struct Tableau {
  Eigen::MatrixXd t;  // rows: constraints; last column: rhs
  std::vector<int> basis;

  void pivot(int r, int col) {
    t.row(r) /= t(r, col);
    for (int i = 0; i < t.rows(); ++i)
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    basis[static_cast<std::size_t>(r)] = col;
  }

  /// Runs Bland's rule on cost vector c restricted to columns < allowed. Returns false when unbounded.
  bool optimise(const Eigen::VectorXd& c, int allowed, double tol) {
    const int m = static_cast<int>(t.rows());
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed && enter < 0; ++j) {
        double rc = c[j];
        for (int r = 0; r < m; ++r) rc -= c[basis[static_cast<std::size_t>(r)]] * t(r, j);
        if (rc < -tol) enter = j;
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        if (t(r, enter) <= tol) continue;
        const double ratio = t(r, t.cols() - 1) / t(r, enter);
        if (ratio < best - tol ||
            (std::abs(ratio - best) <= tol && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(m, n + m + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    const double s = b[r] < 0 ? -1.0 : 1.0;
    tab.t.row(r).head(n) = s * A.row(r);
    tab.t(r, n + r) = 1.0;
    tab.t(r, n + m) = s * b[r];
    tab.basis[static_cast<std::size_t>(r)] = n + r;
  }
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.optimise(phase1, n + m, tol);

  LpResult res;
  double infeasibility = 0.0;
  for (int r = 0; r < m; ++r)
    if (tab.basis[static_cast<std::size_t>(r)] >= n) infeasibility += tab.t(r, n + m);
  if (infeasibility > 1e-9) return res;
  res.feasible = true;

  // Drive remaining (zero-valued) artificials out; drop rows that are redundant.
  std::vector<int> keep;
  for (int r = 0; r < m; ++r) {
    if (tab.basis[static_cast<std::size_t>(r)] < n) {
      keep.push_back(r);
      continue;
    }
    int col = -1;
    for (int j = 0; j < n && col < 0; ++j)
      if (std::abs(tab.t(r, j)) > tol) col = j;
    if (col >= 0) {
      tab.pivot(r, col);
      keep.push_back(r);
    }
  }
  Tableau reduced;
  reduced.t.resize(static_cast<Eigen::Index>(keep.size()), n + 1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    reduced.t.row(static_cast<Eigen::Index>(k)).head(n) = tab.t.row(keep[k]).head(n);
    reduced.t(static_cast<Eigen::Index>(k), n) = tab.t(keep[k], n + m);
    reduced.basis.push_back(tab.basis[static_cast<std::size_t>(keep[k])]);
  }
  Eigen::VectorXd c_ext = c;
  res.bounded = reduced.optimise(c_ext, n, tol);
  res.x = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < reduced.basis.size(); ++k)
    res.x[reduced.basis[k]] = reduced.t(static_cast<Eigen::Index>(k), n);
  res.objective = c.dot(res.x);
  return res;
}

LpResult transport_lp(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w) {
  const int J = static_cast<int>(w.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * J, J * J);
  Eigen::VectorXd b(2 * J);
  Eigen::VectorXd c(J * J);
  for (int i = 0; i < J; ++i) {
    for (int j = 0; j < J; ++j) {
      A(i, i * J + j) = 1.0;
      A(J + j, i * J + j) = 1.0;
      c[i * J + j] = cost(i, j);
    }
    b[i] = w[i];
    b[J + i] = 1.0 / J;
  }
  return simplex(A, b, c);
}

double transport_two_point(const Eigen::MatrixXd& cost, const Eigen::VectorXd& w) {
  // T11 = t, T12 = w1 - t, T21 = 1/2 - t, T22 = w2 - 1/2 + t.
  const double lo = std::max(0.0, w[0] - 0.5);
  const double hi = std::min(w[0], 0.5);
  auto obj = [&](double t) {
    return cost(0, 0) * t + cost(0, 1) * (w[0] - t) + cost(1, 0) * (0.5 - t) + cost(1, 1) * (w[1] - 0.5 + t);
  };
  return std::min(obj(lo), obj(hi));
}

double assignment_brute_force(const Eigen::MatrixXd& cost) {
  const int J = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<std::size_t>(J));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < J; ++i) s += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s / J);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle
