#include "mctrl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace mctrl {

namespace {
constexpr double kGeomTol = 1e-12;
}

bool NodeSet::contains(int node) const {
  return std::binary_search(indices.begin(), indices.end(), node);
}

int NodeSet::position(int node) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), node);
  if (it == indices.end() || *it != node) return -1;
  return static_cast<int>(it - indices.begin());
}

Mesh build_rect_mesh(int nx, int ny, double x_min, double x_max, double y_min,
                     double y_max) {
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("build_rect_mesh: need at least 2 nodes per direction");
  if (!(x_min < x_max) || !(y_min < y_max))
    throw std::invalid_argument("build_rect_mesh: empty rectangle");

  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.x_min = x_min;
  m.x_max = x_max;
  m.y_min = y_min;
  m.y_max = y_max;

  // Endpoints are pinned so boundary nodes compare equal to the bounds;
  // interior nodes use convex weights and stay strictly inside.
  auto coord = [](int i, int n, double lo, double hi) {
    if (i == 0) return lo;
    if (i == n - 1) return hi;
    return ((n - 1 - i) * lo + i * hi) / (n - 1);
  };
  m.nodes.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    double y = coord(j, ny, y_min, y_max);
    for (int i = 0; i < nx; ++i)
      m.nodes[m.node_index(i, j)] = {coord(i, nx, x_min, x_max), y};
  }

  m.triangles.reserve(2 * static_cast<std::size_t>(nx - 1) * (ny - 1));
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      int ll = m.node_index(i, j);
      int lr = m.node_index(i + 1, j);
      int ul = m.node_index(i, j + 1);
      int ur = m.node_index(i + 1, j + 1);
      // Split along ll -> ur; both triangles counterclockwise.
      m.triangles.push_back({ll, lr, ur});
      m.triangles.push_back({ll, ur, ul});
    }
  }

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1)
        m.boundary_nodes.push_back(m.node_index(i, j));
  // Row-major scan already yields sorted indices.

  return m;
}

Region Region::inf_ball(double radius, double cx, double cy) {
  return {Kind::inf_ball, radius, cx, cy};
}
Region Region::two_ball(double radius, double cx, double cy) {
  return {Kind::two_ball, radius, cx, cy};
}
Region Region::whole_domain() { return {Kind::whole_domain, 0.0, 0.0, 0.0}; }
Region Region::boundary() { return {Kind::boundary, 0.0, 0.0, 0.0}; }

NodeSet select_nodes(const Mesh& mesh, const Region& region,
                     std::string label) {
  NodeSet set;
  set.label = std::move(label);
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point2& pt = mesh.nodes[k];
    double dx = pt.x - region.cx;
    double dy = pt.y - region.cy;
    bool in = false;
    switch (region.kind) {
      case Region::Kind::inf_ball:
        in = std::max(std::abs(dx), std::abs(dy)) <= region.radius + kGeomTol;
        break;
      case Region::Kind::two_ball:
        in = std::hypot(dx, dy) <= region.radius + kGeomTol;
        break;
      case Region::Kind::whole_domain:
        in = true;
        break;
      case Region::Kind::boundary:
        in = std::abs(pt.x - mesh.x_min) <= kGeomTol ||
             std::abs(pt.x - mesh.x_max) <= kGeomTol ||
             std::abs(pt.y - mesh.y_min) <= kGeomTol ||
             std::abs(pt.y - mesh.y_max) <= kGeomTol;
        break;
    }
    if (in) set.indices.push_back(k);
  }
  return set;
}

void write_nodes_csv(const Mesh& mesh, std::ostream& os) {
  os << "node,x,y,boundary\n";
  char buf[128];
  std::size_t b = 0;
  for (int k = 0; k < mesh.node_count(); ++k) {
    bool bnd = b < mesh.boundary_nodes.size() && mesh.boundary_nodes[b] == k;
    if (bnd) ++b;
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", k, mesh.nodes[k].x,
                  mesh.nodes[k].y, bnd ? 1 : 0);
    os << buf;
  }
}

void write_triangles_csv(const Mesh& mesh, std::ostream& os) {
  os << "tri,n0,n1,n2\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    os << t << ',' << tri.v0 << ',' << tri.v1 << ',' << tri.v2 << '\n';
  }
}

}  // namespace mctrl
