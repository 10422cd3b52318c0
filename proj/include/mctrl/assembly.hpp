#pragma once

#include <string>
#include <vector>

#include "mctrl/mesh.hpp"
#include "mctrl/sparse.hpp"

namespace mctrl {

enum class BcKind { dirichlet_homogeneous, natural };

// Coefficients of the bilinear form
//   a(y,v) = diffusion * (grad y, grad v) + (c y, v) + robin * <y, v>_boundary.
// The diffusion tensor is a scalar multiple of the identity. c may be a
// constant or a nodal field (reaction_nodal wins when nonempty).
struct OperatorSpec {
  double diffusion = 1.0;
  double reaction = 0.0;
  std::vector<double> reaction_nodal;
  double robin = 0.0;
  BcKind bc_kind = BcKind::dirichlet_homogeneous;
};

struct TargetSpec {
  enum class Kind { zero, two_box, smooth_bump, tabulated };
  Kind kind = Kind::zero;
  // Nodal values, mesh node order; required iff kind == tabulated.
  std::vector<double> values;

  static TargetSpec zero();
  static TargetSpec two_box();
  static TargetSpec smooth_bump();
  static TargetSpec tabulated(std::vector<double> values);
};

// Everything the optimality-system solvers need. Homogeneous Dirichlet
// conditions are imposed by elimination, so all operators live on the free
// nodes; B_h maps control coefficients into free-node load vectors and has
// exactly one unit entry per column.
struct DiscreteProblem {
  SparseMatrix A_h;            // stiffness, free x free
  SparseMatrix M_h;            // mass restricted to the observation region, free x free
  SparseMatrix B_h;            // selection, free x control
  std::vector<double> y_d_vec; // target at free nodes
  NodeSet free_nodes;
  NodeSet control_nodes;
  NodeSet observation_nodes;

  int n_free() const { return free_nodes.size(); }
  int n_control() const { return control_nodes.size(); }
};

// All nodes for natural conditions, interior nodes for Dirichlet.
NodeSet free_nodes_for(const Mesh& mesh, BcKind bc_kind);

// P1 stiffness for `spec`, already restricted to the free nodes when the
// conditions are Dirichlet. Throws std::invalid_argument on negative
// coefficients or a natural-condition form with c == 0 and robin == 0
// (not coercive).
SparseMatrix assemble_stiffness(const Mesh& mesh, const OperatorSpec& spec);

// Full P1 mass matrix over the triangles whose vertices all lie in
// `observation` (node_count x node_count). Pass the whole domain to get the
// standard mass matrix.
SparseMatrix assemble_mass(const Mesh& mesh, const NodeSet& observation);

// Selection matrix free x control. Throws std::invalid_argument if a control
// node is not free (a point source at an eliminated node has no discrete
// effect, which would silently drop mass).
SparseMatrix assemble_control_restriction(const Mesh& mesh,
                                          const NodeSet& control,
                                          const NodeSet& free);

// Nodal interpolation of the target onto the mesh (all nodes).
std::vector<double> interpolate_target(const Mesh& mesh,
                                       const TargetSpec& target);

// Assembles the full problem: stiffness, restricted mass, control selection,
// and the target gathered onto the free nodes.
DiscreteProblem build_problem(const Mesh& mesh, const OperatorSpec& spec,
                              const NodeSet& control,
                              const NodeSet& observation,
                              const TargetSpec& target);

// 1D counterpart on an increasing node vector (P1 on intervals, Dirichlet
// ends eliminated). Control and observation are index sets into the nodes;
// the mass matrix keeps the intervals whose two endpoints are observed.
SparseMatrix assemble_stiffness_1d(const std::vector<double>& nodes);
SparseMatrix assemble_mass_1d(const std::vector<double>& nodes,
                              const NodeSet& observation);
DiscreteProblem build_problem_1d(const std::vector<double>& nodes,
                                 const NodeSet& control,
                                 const NodeSet& observation,
                                 const std::vector<double>& target_at_nodes);

// {0, 1, ..., count-1}.
NodeSet index_range(int count, std::string label = {});

}  // namespace mctrl
