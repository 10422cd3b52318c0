#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mctrl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Vertex indices of one triangle, counterclockwise.
struct Triangle {
  int v0 = 0;
  int v1 = 0;
  int v2 = 0;
};

// Sorted, duplicate-free set of node indices with a free-form label.
struct NodeSet {
  std::vector<int> indices;
  std::string label;

  bool contains(int node) const;
  int size() const { return static_cast<int>(indices.size()); }
  // Position of `node` in `indices`, or -1.
  int position(int node) const;
};

// Structured triangulation of an axis-aligned rectangle: nx*ny nodes on a
// uniform grid, each grid cell split along its lower-left -> upper-right
// diagonal. Node (i,j) has index i + nx*j; i runs fastest.
struct Mesh {
  int nx = 0;
  int ny = 0;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  std::vector<Point2> nodes;
  std::vector<Triangle> triangles;
  std::vector<int> boundary_nodes;  // sorted

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int node_index(int i, int j) const { return i + nx * j; }
  double hx() const { return (x_max - x_min) / (nx - 1); }
  double hy() const { return (y_max - y_min) / (ny - 1); }
};

// Throws std::invalid_argument for nx or ny < 2 or an empty rectangle.
Mesh build_rect_mesh(int nx, int ny, double x_min, double x_max, double y_min,
                     double y_max);

// Node selection predicates. Closed balls use a 1e-12 absolute tolerance on
// the comparison so nodes that land exactly on the radius are kept.
struct Region {
  enum class Kind { inf_ball, two_ball, whole_domain, boundary };
  Kind kind = Kind::whole_domain;
  double radius = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  static Region inf_ball(double radius, double cx = 0.0, double cy = 0.0);
  static Region two_ball(double radius, double cx = 0.0, double cy = 0.0);
  static Region whole_domain();
  static Region boundary();
};

NodeSet select_nodes(const Mesh& mesh, const Region& region,
                     std::string label = {});

// CSV writers: "node,x,y,boundary" and "tri,n0,n1,n2".
void write_nodes_csv(const Mesh& mesh, std::ostream& os);
void write_triangles_csv(const Mesh& mesh, std::ostream& os);

}  // namespace mctrl
