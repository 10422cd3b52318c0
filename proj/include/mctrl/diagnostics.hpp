#pragma once

#include <iosfwd>
#include <vector>

#include "mctrl/assembly.hpp"
#include "mctrl/ssn.hpp"

namespace mctrl {

// Strict-positivity certificate for the source condition: solves
// A_h' p = M_h h and restricts p to the control nodes (eliminated boundary
// nodes contribute 0). satisfied <=> min_on_control > 0.
struct SlaterReport {
  double min_on_control = 0.0;
  double epsilon_margin = 0.0;  // equals min_on_control
  bool satisfied = false;
};

// h defaults to all ones on the free nodes (the observation indicator in
// nodal coordinates). `control` may contain non-free nodes; that is the
// point of the whole-domain check.
SlaterReport check_slater(const DiscreteProblem& pb, const NodeSet& control,
                          const std::vector<double>& h = {});
SlaterReport check_slater(const DiscreteProblem& pb,
                          const std::vector<double>& h = {});

// First-order receipts for a computed state. All sup norms; the
// complementarity gap is |<u, B_h' p + beta>| with beta taken from the state.
struct OptimalityReport {
  double stationarity_residual = 0.0;   // ||A_h' p - M_h (y - y_d)||
  double state_residual = 0.0;          // ||A_h y - B_h u||
  double nonneg_violation_u = 0.0;      // ||min(u, 0)||
  double nonneg_violation_lambda = 0.0; // ||min(B_h' p + beta, 0)||
  double complementarity_gap = 0.0;
  double mass = 0.0;                    // sum of u_j
};

OptimalityReport check_optimality(const SolverState& state,
                                  const DiscreteProblem& pb);

struct SparsityStats {
  int support_size = 0;
  double support_fraction = 0.0;       // support_size / control count
  std::vector<int> support_nodes;      // mesh node indices
};

// Support of u at the relative cutoff threshold_rel * max(1, ||u||_inf).
SparsityStats sparsity_stats(const std::vector<double>& u,
                             const NodeSet& control,
                             double threshold_rel = 1e-8);

// Flat "key: value" lines, one per field, 17 significant digits.
void write_flat(const SlaterReport& r, std::ostream& os);
void write_flat(const OptimalityReport& r, std::ostream& os);
void write_flat(const SparsityStats& s, std::ostream& os);

// JSON objects with the field names as keys.
std::string to_json(const SlaterReport& r);
std::string to_json(const OptimalityReport& r);
std::string to_json(const SparsityStats& s);

}  // namespace mctrl
