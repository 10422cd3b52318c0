#include "mctrl/oracle1d.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "mctrl/sparse.hpp"

namespace mctrl {

namespace {

void check_n(int n) {
  if (n < 2) throw std::invalid_argument("point-source family needs n >= 2");
}

double target(double x) { return 1.0 - x; }

// Simpson rule; exact for the quadratic integrands below.
double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

double exact_counterexample_state(int n, double x) {
  check_n(n);
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("exact_counterexample_state: x outside [0,1]");
  double s = 1.0 / n;
  return x <= s ? (n - 1.0) * x : 1.0 - x;
}

std::vector<double> fem_point_source_1d(int n, const std::vector<double>& nodes) {
  check_n(n);
  if (nodes.size() < 3 || std::abs(nodes.front()) > 1e-12 ||
      std::abs(nodes.back() - 1.0) > 1e-12)
    throw std::invalid_argument("fem_point_source_1d: nodes must span [0,1]");

  int source = -1;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (std::abs(nodes[i] - 1.0 / n) <= 1e-12) source = static_cast<int>(i);
  if (source <= 0 || source + 1 == static_cast<int>(nodes.size()))
    throw std::invalid_argument("fem_point_source_1d: 1/n must be an interior node");

  int n_nodes = static_cast<int>(nodes.size());
  std::vector<int> interior;
  for (int i = 1; i + 1 < n_nodes; ++i) interior.push_back(i);

  SparseMatrix K = assemble_stiffness_1d(nodes).restricted(interior, interior);
  // Point load n * dirac(1/n) tested with hat functions: n at the source node.
  std::vector<double> rhs(interior.size(), 0.0);
  rhs[source - 1] = static_cast<double>(n);

  LinearSolveResult lr = solve(K, rhs, 1e-12);
  std::vector<double> y(n_nodes, 0.0);
  for (std::size_t k = 0; k < interior.size(); ++k) y[interior[k]] = lr.solution[k];
  return y;
}

std::vector<NonattainmentRow> nonattainment_demo(const std::vector<int>& ns) {
  std::vector<NonattainmentRow> rows;
  rows.reserve(ns.size());
  for (int n : ns) {
    check_n(n);
    double s = 1.0 / n;
    auto err2 = [&](double x) {
      double d = exact_counterexample_state(n, x) - target(x);
      return d * d;
    };
    // The misfit is piecewise quadratic with a kink at 1/n; Simpson on each
    // piece integrates it exactly. Right of the kink the state matches the
    // target, so that piece contributes 0.
    double left = simpson(0.0, s, err2(0.0), err2(0.5 * s), err2(s));
    double right = simpson(s, 1.0, err2(s), err2(0.5 * (s + 1.0)), err2(1.0));
    rows.push_back({n, left + right, static_cast<double>(n)});
  }
  return rows;
}

void write_nonattainment_csv(const std::vector<NonattainmentRow>& rows,
                             std::ostream& os) {
  os << "n,objective,mass\n";
  char buf[96];
  for (const NonattainmentRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.n, r.objective, r.mass);
    os << buf;
  }
}

}  // namespace mctrl
