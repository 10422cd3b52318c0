#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mctrl/assembly.hpp"

namespace mctrl {

// Iterate of the optimality system. y and p live on the free nodes, u on the
// control nodes. alpha > 0 marks a regularized iterate, alpha == 0 the limit
// (or beta-shifted) system; beta is the complementarity shift, 0 by default.
struct SolverState {
  std::vector<double> y;
  std::vector<double> p;
  std::vector<double> u;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::uint8_t> active_mask;  // one flag per control node
};

struct StageTrace {
  std::string stage;  // "alpha", "limit" or "beta"
  double alpha = 0.0; // stage parameter (alpha, or beta for the final stage)
  std::vector<double> residual_history;  // sup norms, entry 0 at the start
  int iterations = 0;
  bool converged = false;
};

struct SolveReport {
  std::vector<StageTrace> stages;
  // Blocks of the final residual: adjoint equation, state equation,
  // complementarity reformulation (0 structurally for regularized solves).
  double stationarity_residual = 0.0;
  double state_residual = 0.0;
  double complementarity_residual = 0.0;
  bool converged = false;
  double wall_time_seconds = 0.0;
};

struct PathPoint {
  double alpha_or_beta = 0.0;
  std::vector<double> u;
  double objective = 0.0;     // 0.5 * (y - y_d)' M_h (y - y_d)
  double control_norm = 0.0;  // sum of u_j (discrete total variation)
  int support_size = 0;
};

struct SsnOptions {
  double newton_tol = 1e-9;   // sup norm of the stacked residual
  int max_iter = 50;
  double linear_tol = 1e-10;
  std::ostream* log = nullptr;  // per-iteration lines when set
};

struct SsnResult {
  SolverState state;
  SolveReport report;
};

// Support size with the relative cutoff 1e-8 * max(1, ||u||_inf).
int support_size(const std::vector<double>& u);
double support_threshold(const std::vector<double>& u);

// Residual of the reduced regularized system at (y, p):
//   [ A_h' p - M_h (y - y_d) ; A_h y - (1/alpha) B_h max(0, -B_h' p) ].
std::vector<double> residual_regularized(const SolverState& state,
                                         const DiscreteProblem& pb);

// Residual of the limit system at (y, p, u) with complementarity shift beta:
//   [ A_h' p - M_h (y - y_d) ; A_h y - B_h u ;
//     u - max(0, u - (B_h' p + beta)) ].
std::vector<double> residual_limit(const SolverState& state,
                                   const DiscreteProblem& pb);

// One Newton step of the regularized system. The generalized derivative of
// max(0, v) is the indicator of v > 0 (slope 0 at v == 0).
SolverState newton_step_regularized(const SolverState& state,
                                    const DiscreteProblem& pb,
                                    double linear_tol = 1e-10);

// Semismooth Newton on the regularized system, warm started when `warm` is
// given. On iteration exhaustion returns the best iterate with
// converged == false; linear-solver failures propagate as SolveFailure.
SsnResult solve_regularized(const DiscreteProblem& pb, double alpha,
                            const std::optional<SolverState>& warm,
                            const SsnOptions& opts);

// Semismooth Newton on the limit system with complementarity shift beta
// (beta == 0 is the plain limit system).
SsnResult solve_beta(const DiscreteProblem& pb, double beta,
                     const std::optional<SolverState>& warm,
                     const SsnOptions& opts);

SsnResult solve_limit(const DiscreteProblem& pb,
                      const std::optional<SolverState>& warm,
                      const SsnOptions& opts);

struct ContinuationOptions {
  double alpha_start = 1.0;
  double alpha_factor = 0.1;  // in (0,1)
  double alpha_min = 1e-8;
  double beta = 0.0;          // shift for the final stage
  SsnOptions ssn;
};

struct ContinuationResult {
  SolverState state;           // limit (or beta) solution
  SolverState alpha_endpoint;  // regularized iterate at the final alpha
  SolveReport report;          // all stages including the final one
  std::vector<PathPoint> path; // one point per alpha stage
};

// Anneals alpha from alpha_start down to alpha_min (factor alpha_factor,
// last stage clamped to exactly alpha_min), warm starting every stage, then
// solves the limit/beta system from the endpoint. A failed stage is retried
// once from the previous stage with the reduction halved; if the retry also
// fails the result carries converged == false.
ContinuationResult continuation_path(const DiscreteProblem& pb,
                                     const ContinuationOptions& opts);

}  // namespace mctrl
