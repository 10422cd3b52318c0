#include "mctrl/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mctrl {

namespace {

bool reaction_is_zero(const OperatorSpec& spec) {
  if (!spec.reaction_nodal.empty()) {
    for (double c : spec.reaction_nodal)
      if (c != 0.0) return false;
    return true;
  }
  return spec.reaction == 0.0;
}

void validate(const Mesh& mesh, const OperatorSpec& spec) {
  if (spec.diffusion < 0.0)
    throw std::invalid_argument("assemble_stiffness: diffusion must be >= 0");
  if (spec.robin < 0.0)
    throw std::invalid_argument("assemble_stiffness: robin coefficient must be >= 0");
  if (!spec.reaction_nodal.empty() &&
      static_cast<int>(spec.reaction_nodal.size()) != mesh.node_count())
    throw std::invalid_argument("assemble_stiffness: nodal reaction size mismatch");
  if (spec.reaction_nodal.empty() && spec.reaction < 0.0)
    throw std::invalid_argument("assemble_stiffness: reaction must be >= 0");
  for (double c : spec.reaction_nodal)
    if (c < 0.0)
      throw std::invalid_argument("assemble_stiffness: reaction must be >= 0");
  if (spec.bc_kind == BcKind::natural && reaction_is_zero(spec) && spec.robin == 0.0)
    throw std::invalid_argument(
        "assemble_stiffness: natural conditions with c == 0 and robin == 0 "
        "give a singular operator");
}

// Element contributions on triangle (p0, p1, p2), counterclockwise.
struct P1Element {
  double area;
  double bvec[3];  // opposite-edge y-differences
  double cvec[3];  // opposite-edge x-differences
};

P1Element element_geometry(const Point2& p0, const Point2& p1, const Point2& p2) {
  P1Element e;
  e.bvec[0] = p1.y - p2.y;
  e.bvec[1] = p2.y - p0.y;
  e.bvec[2] = p0.y - p1.y;
  e.cvec[0] = p2.x - p1.x;
  e.cvec[1] = p0.x - p2.x;
  e.cvec[2] = p1.x - p0.x;
  double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  e.area = 0.5 * det;  // positive for counterclockwise vertices
  return e;
}

void append_boundary_segments(const Mesh& mesh, double robin,
                              std::vector<Triplet>& out) {
  auto add_segment = [&](int a, int b, double len) {
    double w = robin * len / 6.0;
    out.push_back({a, a, 2.0 * w});
    out.push_back({b, b, 2.0 * w});
    out.push_back({a, b, w});
    out.push_back({b, a, w});
  };
  double hx = mesh.hx();
  double hy = mesh.hy();
  for (int i = 0; i + 1 < mesh.nx; ++i) {
    add_segment(mesh.node_index(i, 0), mesh.node_index(i + 1, 0), hx);
    add_segment(mesh.node_index(i, mesh.ny - 1), mesh.node_index(i + 1, mesh.ny - 1), hx);
  }
  for (int j = 0; j + 1 < mesh.ny; ++j) {
    add_segment(mesh.node_index(0, j), mesh.node_index(0, j + 1), hy);
    add_segment(mesh.node_index(mesh.nx - 1, j), mesh.node_index(mesh.nx - 1, j + 1), hy);
  }
}

}  // namespace

TargetSpec TargetSpec::zero() { return {Kind::zero, {}}; }
TargetSpec TargetSpec::two_box() { return {Kind::two_box, {}}; }
TargetSpec TargetSpec::smooth_bump() { return {Kind::smooth_bump, {}}; }
TargetSpec TargetSpec::tabulated(std::vector<double> values) {
  return {Kind::tabulated, std::move(values)};
}

NodeSet free_nodes_for(const Mesh& mesh, BcKind bc_kind) {
  NodeSet set;
  set.label = bc_kind == BcKind::natural ? "all" : "interior";
  if (bc_kind == BcKind::natural) {
    set.indices.resize(mesh.node_count());
    for (int k = 0; k < mesh.node_count(); ++k) set.indices[k] = k;
    return set;
  }
  std::size_t b = 0;
  for (int k = 0; k < mesh.node_count(); ++k) {
    if (b < mesh.boundary_nodes.size() && mesh.boundary_nodes[b] == k) {
      ++b;
      continue;
    }
    set.indices.push_back(k);
  }
  return set;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const OperatorSpec& spec) {
  validate(mesh, spec);

  std::vector<Triplet> trips;
  trips.reserve(mesh.triangle_count() * 9 + (spec.robin > 0.0 ? 8 * (mesh.nx + mesh.ny) : 0));

  for (const Triangle& tri : mesh.triangles) {
    int v[3] = {tri.v0, tri.v1, tri.v2};
    P1Element e = element_geometry(mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]);

    double c_bar;
    if (!spec.reaction_nodal.empty())
      c_bar = (spec.reaction_nodal[v[0]] + spec.reaction_nodal[v[1]] +
               spec.reaction_nodal[v[2]]) / 3.0;
    else
      c_bar = spec.reaction;

    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double k_ab = spec.diffusion *
                      (e.bvec[a] * e.bvec[b] + e.cvec[a] * e.cvec[b]) / (4.0 * e.area);
        double m_ab = e.area / 12.0 * (a == b ? 2.0 : 1.0);
        double val = k_ab + c_bar * m_ab;
        if (val != 0.0) trips.push_back({v[a], v[b], val});
      }
  }

  if (spec.robin > 0.0) append_boundary_segments(mesh, spec.robin, trips);

  SparseMatrix full = SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), trips);
  if (spec.bc_kind == BcKind::natural) return full;
  NodeSet free = free_nodes_for(mesh, spec.bc_kind);
  return full.restricted(free.indices, free.indices);
}

SparseMatrix assemble_mass(const Mesh& mesh, const NodeSet& observation) {
  std::vector<Triplet> trips;
  trips.reserve(mesh.triangle_count() * 9);
  for (const Triangle& tri : mesh.triangles) {
    int v[3] = {tri.v0, tri.v1, tri.v2};
    if (!observation.contains(v[0]) || !observation.contains(v[1]) ||
        !observation.contains(v[2]))
      continue;
    P1Element e = element_geometry(mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.push_back({v[a], v[b], e.area / 12.0 * (a == b ? 2.0 : 1.0)});
  }
  return SparseMatrix::from_triplets(mesh.node_count(), mesh.node_count(), trips);
}

SparseMatrix assemble_control_restriction(const Mesh& mesh,
                                          const NodeSet& control,
                                          const NodeSet& free) {
  (void)mesh;
  std::vector<Triplet> trips;
  trips.reserve(control.indices.size());
  for (std::size_t j = 0; j < control.indices.size(); ++j) {
    int pos = free.position(control.indices[j]);
    if (pos < 0)
      throw std::invalid_argument(
          "assemble_control_restriction: control node " +
          std::to_string(control.indices[j]) +
          " is not a free node (point source at an eliminated node)");
    trips.push_back({pos, static_cast<int>(j), 1.0});
  }
  return SparseMatrix::from_triplets(free.size(), control.size(), trips);
}

std::vector<double> interpolate_target(const Mesh& mesh, const TargetSpec& target) {
  std::vector<double> v(mesh.node_count(), 0.0);
  switch (target.kind) {
    case TargetSpec::Kind::zero:
      break;
    case TargetSpec::Kind::two_box:
      for (int k = 0; k < mesh.node_count(); ++k) {
        double x = mesh.nodes[k].x;
        double y = mesh.nodes[k].y;
        double val = 0.0;
        if (std::abs(x - 0.5) < 0.25 && std::abs(y - 0.5) < 0.25) val += 1.0;
        if (std::abs(x + 0.5) < 0.25 && std::abs(y + 0.5) < 0.25) val += 0.5;
        v[k] = val;
      }
      break;
    case TargetSpec::Kind::smooth_bump:
      for (int k = 0; k < mesh.node_count(); ++k) {
        double x = mesh.nodes[k].x;
        double y = mesh.nodes[k].y;
        v[k] = (1.0 - x * x) * (1.0 - y * y);
      }
      break;
    case TargetSpec::Kind::tabulated:
      if (static_cast<int>(target.values.size()) != mesh.node_count())
        throw std::invalid_argument("interpolate_target: tabulated size mismatch");
      v = target.values;
      break;
  }
  return v;
}

DiscreteProblem build_problem(const Mesh& mesh, const OperatorSpec& spec,
                              const NodeSet& control, const NodeSet& observation,
                              const TargetSpec& target) {
  DiscreteProblem pb;
  pb.free_nodes = free_nodes_for(mesh, spec.bc_kind);
  pb.control_nodes = control;
  pb.observation_nodes = observation;
  pb.A_h = assemble_stiffness(mesh, spec);
  pb.M_h = assemble_mass(mesh, observation)
               .restricted(pb.free_nodes.indices, pb.free_nodes.indices);
  pb.B_h = assemble_control_restriction(mesh, control, pb.free_nodes);
  std::vector<double> full = interpolate_target(mesh, target);
  pb.y_d_vec.reserve(pb.free_nodes.indices.size());
  for (int k : pb.free_nodes.indices) pb.y_d_vec.push_back(full[k]);
  return pb;
}

NodeSet index_range(int count, std::string label) {
  NodeSet set;
  set.label = std::move(label);
  set.indices.resize(count);
  for (int i = 0; i < count; ++i) set.indices[i] = i;
  return set;
}

namespace {

void check_increasing(const std::vector<double>& nodes) {
  if (nodes.size() < 3)
    throw std::invalid_argument("1d assembly: need at least 3 nodes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw std::invalid_argument("1d assembly: nodes must be strictly increasing");
}

}  // namespace

SparseMatrix assemble_stiffness_1d(const std::vector<double>& nodes) {
  check_increasing(nodes);
  int n = static_cast<int>(nodes.size());
  std::vector<Triplet> trips;
  for (int i = 0; i + 1 < n; ++i) {
    double h = nodes[i + 1] - nodes[i];
    trips.push_back({i, i, 1.0 / h});
    trips.push_back({i + 1, i + 1, 1.0 / h});
    trips.push_back({i, i + 1, -1.0 / h});
    trips.push_back({i + 1, i, -1.0 / h});
  }
  return SparseMatrix::from_triplets(n, n, trips);
}

SparseMatrix assemble_mass_1d(const std::vector<double>& nodes,
                              const NodeSet& observation) {
  check_increasing(nodes);
  int n = static_cast<int>(nodes.size());
  std::vector<Triplet> trips;
  for (int i = 0; i + 1 < n; ++i) {
    if (!observation.contains(i) || !observation.contains(i + 1)) continue;
    double h = nodes[i + 1] - nodes[i];
    trips.push_back({i, i, h / 3.0});
    trips.push_back({i + 1, i + 1, h / 3.0});
    trips.push_back({i, i + 1, h / 6.0});
    trips.push_back({i + 1, i, h / 6.0});
  }
  return SparseMatrix::from_triplets(n, n, trips);
}

DiscreteProblem build_problem_1d(const std::vector<double>& nodes,
                                 const NodeSet& control,
                                 const NodeSet& observation,
                                 const std::vector<double>& target_at_nodes) {
  check_increasing(nodes);
  int n = static_cast<int>(nodes.size());
  if (static_cast<int>(target_at_nodes.size()) != n)
    throw std::invalid_argument("build_problem_1d: target size mismatch");

  DiscreteProblem pb;
  pb.free_nodes.label = "interior";
  for (int i = 1; i + 1 < n; ++i) pb.free_nodes.indices.push_back(i);
  pb.control_nodes = control;
  pb.observation_nodes = observation;
  pb.A_h = assemble_stiffness_1d(nodes).restricted(pb.free_nodes.indices,
                                                   pb.free_nodes.indices);
  pb.M_h = assemble_mass_1d(nodes, observation)
               .restricted(pb.free_nodes.indices, pb.free_nodes.indices);
  // Same selection layout as the 2D builder.
  std::vector<Triplet> trips;
  for (std::size_t j = 0; j < control.indices.size(); ++j) {
    int pos = pb.free_nodes.position(control.indices[j]);
    if (pos < 0)
      throw std::invalid_argument("build_problem_1d: control node not free");
    trips.push_back({pos, static_cast<int>(j), 1.0});
  }
  pb.B_h = SparseMatrix::from_triplets(pb.free_nodes.size(), control.size(), trips);
  for (int k : pb.free_nodes.indices) pb.y_d_vec.push_back(target_at_nodes[k]);
  return pb;
}

}  // namespace mctrl
