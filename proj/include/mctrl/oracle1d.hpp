#pragma once

#include <iosfwd>
#include <vector>

#include "mctrl/assembly.hpp"

namespace mctrl {

// Point-source family on (0,1) with homogeneous Dirichlet ends:
//   -y'' = n * dirac(1/n),  n >= 2.
// The exact solution is piecewise linear with a kink at 1/n:
//   y(x) = (n-1) x        for x <= 1/n,
//   y(x) = 1 - x          for x >= 1/n.
double exact_counterexample_state(int n, double x);

// P1 Galerkin solution of the same problem on `nodes` (increasing, first and
// last are the Dirichlet ends). When 1/n is a mesh node the discrete solution
// reproduces the exact one, because the exact solution lies in the P1 space.
std::vector<double> fem_point_source_1d(int n, const std::vector<double>& nodes);

struct NonattainmentRow {
  int n = 0;
  double objective = 0.0;  // ||y_n - y_d||_{L2}^2 with y_d(x) = 1 - x
  double mass = 0.0;       // total variation of the control, = n
};

// Objective and control mass along the family, exact piecewise-polynomial
// integration (Simpson on each linear piece). The objective decays to 0 while
// the mass blows up, so no admissible control attains the infimum.
std::vector<NonattainmentRow> nonattainment_demo(const std::vector<int>& ns);

// CSV "n,objective,mass", 17 significant digits.
void write_nonattainment_csv(const std::vector<NonattainmentRow>& rows,
                             std::ostream& os);

}  // namespace mctrl
