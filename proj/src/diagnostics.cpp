#include "mctrl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "mctrl/sparse.hpp"
#include "mctrl/vec.hpp"

namespace mctrl {

namespace {

void put(std::ostream& os, const char* key, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s: %.17g\n", key, v);
  os << buf;
}

void put(std::ostream& os, const char* key, int v) {
  os << key << ": " << v << '\n';
}

void put(std::ostream& os, const char* key, bool v) {
  os << key << ": " << (v ? "true" : "false") << '\n';
}

}  // namespace

SlaterReport check_slater(const DiscreteProblem& pb, const NodeSet& control,
                          const std::vector<double>& h) {
  std::vector<double> rhs;
  if (h.empty())
    rhs.assign(pb.n_free(), 1.0);
  else if (static_cast<int>(h.size()) == pb.n_free())
    rhs = h;
  else
    throw std::invalid_argument("check_slater: h size mismatch");

  rhs = pb.M_h.matvec(rhs);
  // 1e-8 here: the certificate only needs the sign and rough size of the
  // minimum, and tighter relative residuals are unreachable when the
  // multiplier is large against the load (reaction-dominated operators).
  LinearSolveResult lr = solve(pb.A_h.transpose(), rhs, 1e-8);

  SlaterReport rep;
  bool first = true;
  for (int node : control.indices) {
    int pos = pb.free_nodes.position(node);
    double val = pos >= 0 ? lr.solution[pos] : 0.0;  // eliminated nodes carry 0
    if (first || val < rep.min_on_control) rep.min_on_control = val;
    first = false;
  }
  rep.epsilon_margin = rep.min_on_control;
  rep.satisfied = !first && rep.min_on_control > 0.0;
  return rep;
}

SlaterReport check_slater(const DiscreteProblem& pb, const std::vector<double>& h) {
  return check_slater(pb, pb.control_nodes, h);
}

OptimalityReport check_optimality(const SolverState& state,
                                  const DiscreteProblem& pb) {
  OptimalityReport rep;

  std::vector<double> diff = subtract(state.y, pb.y_d_vec);
  std::vector<double> r1 = subtract(pb.A_h.matvec_transpose(state.p),
                                    pb.M_h.matvec(diff));
  rep.stationarity_residual = sup_norm(r1);

  std::vector<double> r2 = subtract(pb.A_h.matvec(state.y), pb.B_h.matvec(state.u));
  rep.state_residual = sup_norm(r2);

  std::vector<double> lambda = pb.B_h.matvec_transpose(state.p);
  double gap = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    double lam = lambda[j] + state.beta;
    rep.nonneg_violation_u = std::max(rep.nonneg_violation_u, -std::min(state.u[j], 0.0));
    rep.nonneg_violation_lambda = std::max(rep.nonneg_violation_lambda, -std::min(lam, 0.0));
    gap += state.u[j] * lam;
  }
  rep.complementarity_gap = std::abs(gap);
  rep.mass = sum(state.u);
  return rep;
}

SparsityStats sparsity_stats(const std::vector<double>& u, const NodeSet& control,
                             double threshold_rel) {
  if (u.size() != control.indices.size())
    throw std::invalid_argument("sparsity_stats: control size mismatch");
  double thr = threshold_rel * std::max(1.0, sup_norm(u));
  SparsityStats st;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (u[j] > thr) st.support_nodes.push_back(control.indices[j]);
  st.support_size = static_cast<int>(st.support_nodes.size());
  st.support_fraction =
      control.indices.empty() ? 0.0 : static_cast<double>(st.support_size) / control.size();
  return st;
}

void write_flat(const SlaterReport& r, std::ostream& os) {
  put(os, "min_on_control", r.min_on_control);
  put(os, "epsilon_margin", r.epsilon_margin);
  put(os, "satisfied", r.satisfied);
}

void write_flat(const OptimalityReport& r, std::ostream& os) {
  put(os, "stationarity_residual", r.stationarity_residual);
  put(os, "state_residual", r.state_residual);
  put(os, "nonneg_violation_u", r.nonneg_violation_u);
  put(os, "nonneg_violation_lambda", r.nonneg_violation_lambda);
  put(os, "complementarity_gap", r.complementarity_gap);
  put(os, "mass", r.mass);
}

void write_flat(const SparsityStats& s, std::ostream& os) {
  put(os, "support_size", s.support_size);
  put(os, "support_fraction", s.support_fraction);
}

std::string to_json(const SlaterReport& r) {
  nlohmann::json j;
  j["min_on_control"] = r.min_on_control;
  j["epsilon_margin"] = r.epsilon_margin;
  j["satisfied"] = r.satisfied;
  return j.dump();
}

std::string to_json(const OptimalityReport& r) {
  nlohmann::json j;
  j["stationarity_residual"] = r.stationarity_residual;
  j["state_residual"] = r.state_residual;
  j["nonneg_violation_u"] = r.nonneg_violation_u;
  j["nonneg_violation_lambda"] = r.nonneg_violation_lambda;
  j["complementarity_gap"] = r.complementarity_gap;
  j["mass"] = r.mass;
  return j.dump();
}

std::string to_json(const SparsityStats& s) {
  nlohmann::json j;
  j["support_size"] = s.support_size;
  j["support_fraction"] = s.support_fraction;
  j["support_nodes"] = s.support_nodes;
  return j.dump();
}

}  // namespace mctrl
