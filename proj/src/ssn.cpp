#include "mctrl/ssn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "mctrl/vec.hpp"

namespace mctrl {

namespace {

// Free-node row of each control column; B_h has one unit entry per column.
std::vector<int> control_rows(const SparseMatrix& B) {
  std::vector<int> rows(B.cols(), -1);
  const auto& off = B.row_offsets();
  const auto& col = B.col_indices();
  for (int r = 0; r < B.rows(); ++r)
    for (int k = off[r]; k < off[r + 1]; ++k) rows[col[k]] = r;
  return rows;
}

struct Work {
  const DiscreteProblem& pb;
  int n;
  int m;
  std::vector<int> ctrl_row;
  std::vector<Triplet> base_reg;    // constant Jacobian blocks, regularized
  std::vector<Triplet> base_limit;  // constant Jacobian blocks, limit

  explicit Work(const DiscreteProblem& pb_)
      : pb(pb_), n(pb_.n_free()), m(pb_.n_control()), ctrl_row(control_rows(pb_.B_h)) {
    const auto& a_off = pb.A_h.row_offsets();
    const auto& a_col = pb.A_h.col_indices();
    const auto& a_val = pb.A_h.values();
    const auto& m_off = pb.M_h.row_offsets();
    const auto& m_col = pb.M_h.col_indices();
    const auto& m_val = pb.M_h.values();

    for (int r = 0; r < n; ++r) {
      for (int k = m_off[r]; k < m_off[r + 1]; ++k)
        base_reg.push_back({r, m_col[k], -m_val[k]});
      for (int k = a_off[r]; k < a_off[r + 1]; ++k) {
        base_reg.push_back({a_col[k], n + r, a_val[k]});  // A' block via scatter
        base_reg.push_back({n + r, a_col[k], a_val[k]});
      }
    }
    base_limit = base_reg;
    for (int j = 0; j < m; ++j)
      base_limit.push_back({n + ctrl_row[j], 2 * n + j, -1.0});
  }

  std::vector<double> b_transpose_p(const std::vector<double>& p) const {
    std::vector<double> v(m);
    for (int j = 0; j < m; ++j) v[j] = p[ctrl_row[j]];
    return v;
  }
};

std::vector<double> residual_reg_impl(const Work& w, const std::vector<double>& y,
                                      const std::vector<double>& p, double alpha) {
  const DiscreteProblem& pb = w.pb;
  std::vector<double> r(2 * w.n);
  std::vector<double> diff = subtract(y, pb.y_d_vec);
  std::vector<double> atp = pb.A_h.matvec_transpose(p);
  std::vector<double> mdiff = pb.M_h.matvec(diff);
  for (int i = 0; i < w.n; ++i) r[i] = atp[i] - mdiff[i];

  std::vector<double> ay = pb.A_h.matvec(y);
  for (int i = 0; i < w.n; ++i) r[w.n + i] = ay[i];
  for (int j = 0; j < w.m; ++j) {
    double v = -p[w.ctrl_row[j]];
    if (v > 0.0) r[w.n + w.ctrl_row[j]] -= v / alpha;
  }
  return r;
}

std::vector<double> residual_limit_impl(const Work& w, const std::vector<double>& y,
                                        const std::vector<double>& p,
                                        const std::vector<double>& u, double beta) {
  const DiscreteProblem& pb = w.pb;
  std::vector<double> r(2 * w.n + w.m);
  std::vector<double> diff = subtract(y, pb.y_d_vec);
  std::vector<double> atp = pb.A_h.matvec_transpose(p);
  std::vector<double> mdiff = pb.M_h.matvec(diff);
  for (int i = 0; i < w.n; ++i) r[i] = atp[i] - mdiff[i];

  std::vector<double> ay = pb.A_h.matvec(y);
  for (int i = 0; i < w.n; ++i) r[w.n + i] = ay[i];
  for (int j = 0; j < w.m; ++j) r[w.n + w.ctrl_row[j]] -= u[j];

  for (int j = 0; j < w.m; ++j) {
    double v = u[j] - (p[w.ctrl_row[j]] + beta);
    r[2 * w.n + j] = u[j] - std::max(0.0, v);
  }
  return r;
}

void refresh_mask_reg(const Work& w, SolverState& s) {
  s.active_mask.assign(w.m, 0);
  for (int j = 0; j < w.m; ++j)
    if (-s.p[w.ctrl_row[j]] > 0.0) s.active_mask[j] = 1;
}

void refresh_mask_limit(const Work& w, SolverState& s) {
  s.active_mask.assign(w.m, 0);
  for (int j = 0; j < w.m; ++j)
    if (s.u[j] - (s.p[w.ctrl_row[j]] + s.beta) > 0.0) s.active_mask[j] = 1;
}

int active_count(const SolverState& s) {
  int c = 0;
  for (auto f : s.active_mask) c += f;
  return c;
}

void log_line(std::ostream* log, const std::string& stage, double param, int iter,
              double res, int actives) {
  if (!log) return;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s\t%.6e\t%d\t%.9e\t%d\n", stage.c_str(), param,
                iter, res, actives);
  *log << buf;
  log->flush();
}

SolverState reg_step(const Work& w, const SolverState& state, double linear_tol) {
  const double alpha = state.alpha;
  std::vector<double> r = residual_reg_impl(w, state.y, state.p, alpha);

  std::vector<Triplet> trips = w.base_reg;
  for (int j = 0; j < w.m; ++j) {
    double v = -state.p[w.ctrl_row[j]];
    if (v > 0.0)
      trips.push_back({w.n + w.ctrl_row[j], w.n + w.ctrl_row[j], 1.0 / alpha});
  }
  SparseMatrix J = SparseMatrix::from_triplets(2 * w.n, 2 * w.n, trips);
  for (double& x : r) x = -x;
  LinearSolveResult lr = solve(J, r, linear_tol);

  SolverState next = state;
  for (int i = 0; i < w.n; ++i) {
    next.y[i] += lr.solution[i];
    next.p[i] += lr.solution[w.n + i];
  }
  for (int j = 0; j < w.m; ++j)
    next.u[j] = std::max(0.0, -next.p[w.ctrl_row[j]]) / alpha;
  refresh_mask_reg(w, next);
  return next;
}

SolverState limit_step(const Work& w, const SolverState& state, double linear_tol) {
  std::vector<double> r = residual_limit_impl(w, state.y, state.p, state.u, state.beta);

  std::vector<Triplet> trips = w.base_limit;
  for (int j = 0; j < w.m; ++j) {
    double v = state.u[j] - (state.p[w.ctrl_row[j]] + state.beta);
    if (v > 0.0)
      trips.push_back({2 * w.n + j, w.n + w.ctrl_row[j], 1.0});
    else
      trips.push_back({2 * w.n + j, 2 * w.n + j, 1.0});
  }
  SparseMatrix J = SparseMatrix::from_triplets(2 * w.n + w.m, 2 * w.n + w.m, trips);
  for (double& x : r) x = -x;
  LinearSolveResult lr = solve(J, r, linear_tol);

  SolverState next = state;
  for (int i = 0; i < w.n; ++i) {
    next.y[i] += lr.solution[i];
    next.p[i] += lr.solution[w.n + i];
  }
  for (int j = 0; j < w.m; ++j) next.u[j] += lr.solution[2 * w.n + j];
  refresh_mask_limit(w, next);
  return next;
}

SolverState init_state(const Work& w, double alpha, double beta,
                       const std::optional<SolverState>& warm) {
  SolverState s;
  s.alpha = alpha;
  s.beta = beta;
  if (warm && static_cast<int>(warm->y.size()) == w.n &&
      static_cast<int>(warm->p.size()) == w.n) {
    s.y = warm->y;
    s.p = warm->p;
    s.u = (static_cast<int>(warm->u.size()) == w.m) ? warm->u
                                                    : std::vector<double>(w.m, 0.0);
  } else {
    s.y.assign(w.n, 0.0);
    s.p.assign(w.n, 0.0);
    s.u.assign(w.m, 0.0);
  }
  return s;
}

enum class SystemKind { regularized, limit };

SsnResult run_newton(const DiscreteProblem& pb, SystemKind kind, double param,
                     const std::optional<SolverState>& warm, const SsnOptions& opts,
                     const std::string& stage_label) {
  Work w(pb);
  auto t0 = std::chrono::steady_clock::now();

  const bool reg = kind == SystemKind::regularized;
  SolverState s = init_state(w, reg ? param : 0.0, reg ? 0.0 : param, warm);
  if (reg) {
    if (!(param > 0.0))
      throw std::invalid_argument("solve_regularized: alpha must be positive");
    for (int j = 0; j < w.m; ++j)
      s.u[j] = std::max(0.0, -s.p[w.ctrl_row[j]]) / param;
    refresh_mask_reg(w, s);
  } else {
    if (param < 0.0) throw std::invalid_argument("solve_beta: beta must be >= 0");
    refresh_mask_limit(w, s);
  }

  StageTrace trace;
  trace.stage = stage_label;
  trace.alpha = param;

  auto residual = [&](const SolverState& st) {
    return reg ? residual_reg_impl(w, st.y, st.p, st.alpha)
               : residual_limit_impl(w, st.y, st.p, st.u, st.beta);
  };

  std::vector<double> r = residual(s);
  double rn = sup_norm(r);
  trace.residual_history.push_back(rn);
  log_line(opts.log, stage_label, param, 0, rn, active_count(s));

  int iter = 0;
  while (rn > opts.newton_tol && iter < opts.max_iter) {
    s = reg ? reg_step(w, s, opts.linear_tol) : limit_step(w, s, opts.linear_tol);
    ++iter;
    r = residual(s);
    rn = sup_norm(r);
    trace.residual_history.push_back(rn);
    log_line(opts.log, stage_label, param, iter, rn, active_count(s));
  }
  trace.iterations = iter;
  trace.converged = rn <= opts.newton_tol;

  SolveReport report;
  report.stages.push_back(trace);
  report.converged = trace.converged;
  report.stationarity_residual = 0.0;
  report.state_residual = 0.0;
  report.complementarity_residual = 0.0;
  for (int i = 0; i < w.n; ++i) {
    report.stationarity_residual = std::max(report.stationarity_residual, std::abs(r[i]));
    report.state_residual = std::max(report.state_residual, std::abs(r[w.n + i]));
  }
  if (!reg)
    for (int j = 0; j < w.m; ++j)
      report.complementarity_residual =
          std::max(report.complementarity_residual, std::abs(r[2 * w.n + j]));
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(s), std::move(report)};
}

PathPoint make_path_point(const DiscreteProblem& pb, const SolverState& s,
                          double param) {
  PathPoint pt;
  pt.alpha_or_beta = param;
  pt.u = s.u;
  std::vector<double> diff = subtract(s.y, pb.y_d_vec);
  pt.objective = 0.5 * dot(diff, pb.M_h.matvec(diff));
  pt.control_norm = sum(s.u);
  pt.support_size = support_size(s.u);
  return pt;
}

}  // namespace

double support_threshold(const std::vector<double>& u) {
  return 1e-8 * std::max(1.0, sup_norm(u));
}

int support_size(const std::vector<double>& u) {
  double thr = support_threshold(u);
  int c = 0;
  for (double x : u)
    if (x > thr) ++c;
  return c;
}

std::vector<double> residual_regularized(const SolverState& state,
                                         const DiscreteProblem& pb) {
  if (!(state.alpha > 0.0))
    throw std::invalid_argument("residual_regularized: alpha must be positive");
  Work w(pb);
  return residual_reg_impl(w, state.y, state.p, state.alpha);
}

std::vector<double> residual_limit(const SolverState& state,
                                   const DiscreteProblem& pb) {
  Work w(pb);
  return residual_limit_impl(w, state.y, state.p, state.u, state.beta);
}

SolverState newton_step_regularized(const SolverState& state,
                                    const DiscreteProblem& pb, double linear_tol) {
  if (!(state.alpha > 0.0))
    throw std::invalid_argument("newton_step_regularized: alpha must be positive");
  Work w(pb);
  return reg_step(w, state, linear_tol);
}

SsnResult solve_regularized(const DiscreteProblem& pb, double alpha,
                            const std::optional<SolverState>& warm,
                            const SsnOptions& opts) {
  return run_newton(pb, SystemKind::regularized, alpha, warm, opts, "alpha");
}

SsnResult solve_beta(const DiscreteProblem& pb, double beta,
                     const std::optional<SolverState>& warm, const SsnOptions& opts) {
  return run_newton(pb, SystemKind::limit, beta, warm, opts,
                    beta == 0.0 ? "limit" : "beta");
}

SsnResult solve_limit(const DiscreteProblem& pb, const std::optional<SolverState>& warm,
                      const SsnOptions& opts) {
  return solve_beta(pb, 0.0, warm, opts);
}

ContinuationResult continuation_path(const DiscreteProblem& pb,
                                     const ContinuationOptions& opts) {
  if (!(opts.alpha_start > opts.alpha_min) || !(opts.alpha_min > 0.0))
    throw std::invalid_argument("continuation_path: need alpha_start > alpha_min > 0");
  if (!(opts.alpha_factor > 0.0) || !(opts.alpha_factor < 1.0))
    throw std::invalid_argument("continuation_path: alpha_factor must be in (0,1)");

  auto t0 = std::chrono::steady_clock::now();
  ContinuationResult out;
  // Size-correct fallback so a failure before any converged stage still
  // reports a usable (zero) iterate instead of empty vectors.
  out.state.alpha = opts.alpha_start;
  out.state.beta = opts.beta;
  out.state.y.assign(pb.n_free(), 0.0);
  out.state.p.assign(pb.n_free(), 0.0);
  out.state.u.assign(pb.n_control(), 0.0);
  out.state.active_mask.assign(pb.n_control(), 0);
  out.alpha_endpoint = out.state;
  std::optional<SolverState> warm;
  double prev_alpha = 0.0;
  bool have_prev = false;
  bool failed = false;
  double alpha = opts.alpha_start;

  auto clamp_next = [&](double a) {
    double next = a * opts.alpha_factor;
    if (next < opts.alpha_min * (1.0 + 1e-12)) next = opts.alpha_min;
    return next;
  };

  auto stage_solve = [&](double a) {
    try {
      return solve_regularized(pb, a, warm, opts.ssn);
    } catch (const SolveFailure& e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "stage alpha=%.6e: ", a);
      throw SolveFailure(std::string(buf) + e.what(), e.best_residual());
    }
  };

  while (true) {
    SsnResult stage = stage_solve(alpha);
    out.report.stages.push_back(stage.report.stages.front());

    if (!stage.report.converged) {
      // One retry from the previous converged stage with the reduction halved.
      double milder =
          std::min(2.0 * opts.alpha_factor, 0.5 * (1.0 + opts.alpha_factor));
      double retry_alpha = have_prev ? std::max(prev_alpha * milder, opts.alpha_min)
                                     : alpha;
      if (!have_prev || retry_alpha <= alpha) {
        failed = true;
        break;
      }
      SsnResult retry = stage_solve(retry_alpha);
      out.report.stages.push_back(retry.report.stages.front());
      if (!retry.report.converged) {
        failed = true;
        break;
      }
      stage = std::move(retry);
      alpha = retry_alpha;
    }

    warm = stage.state;
    prev_alpha = alpha;
    have_prev = true;
    out.path.push_back(make_path_point(pb, stage.state, alpha));
    out.alpha_endpoint = stage.state;

    if (alpha <= opts.alpha_min * (1.0 + 1e-12)) break;
    alpha = clamp_next(alpha);
  }

  if (failed) {
    out.report.converged = false;
    if (have_prev && warm) {
      out.state = *warm;
      out.alpha_endpoint = *warm;
    }
    out.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }

  SsnResult last = solve_beta(pb, opts.beta, warm, opts.ssn);
  out.report.stages.push_back(last.report.stages.front());
  out.report.converged = last.report.converged;
  out.report.stationarity_residual = last.report.stationarity_residual;
  out.report.state_residual = last.report.state_residual;
  out.report.complementarity_residual = last.report.complementarity_residual;
  out.state = std::move(last.state);
  out.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace mctrl
