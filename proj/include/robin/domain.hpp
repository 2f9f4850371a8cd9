#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace robin {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double norm(Point a);

class EmptyDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Boolean vertex mask on an nx-by-ny lattice, row-major with ix fastest.
struct GridMask {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> inside;

  bool at(int ix, int iy) const { return inside[static_cast<std::size_t>(iy) * nx + ix] != 0; }
};

/// Edge of the cell complex separating an inside cell from the outside.
struct BoundaryFace {
  int a = -1;  // vertex index, counter-clockwise order seen from inside
  int b = -1;
  Point normal;       // outward, axis aligned
  Point midpoint;
  double measure = 0.0;  // always h
  double weight = 0.0;   // quadrature weight for boundary integrals
  int inner_a = -1;      // vertex one cell inward from a (or -1)
  int inner_b = -1;
};

/// Optional analytic outward normal used to correct staircase boundary weights.
using NormalField = std::function<std::optional<Point>(Point)>;

/// Masked uniform grid. Omega is the union of cells whose four corners are
/// inside the mask; vertices are the corners of those cells. Each cell is split
/// into two triangles along its (ix,iy)-(ix+1,iy+1) diagonal.
class Domain {
 public:
  static constexpr int kDim = 2;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Point origin() const { return origin_; }

  std::size_t num_vertices() const { return node_of_vertex_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// Vertex index for lattice node (ix, iy), or -1 when the node is not a vertex.
  int vertex_at(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return -1;
    return vertex_of_node_[static_cast<std::size_t>(iy) * nx_ + ix];
  }
  std::array<int, 2> lattice(int v) const {
    const int node = node_of_vertex_[v];
    return {node % nx_, node / nx_};
  }
  Point position(int v) const {
    const auto [ix, iy] = lattice(v);
    return {origin_.x + h_ * ix, origin_.y + h_ * iy};
  }
  bool cell_inside(int cx, int cy) const {
    if (cx < 0 || cy < 0 || cx >= nx_ - 1 || cy >= ny_ - 1) return false;
    return cell_inside_[static_cast<std::size_t>(cy) * (nx_ - 1) + cx] != 0;
  }
  bool is_boundary_vertex(int v) const { return on_boundary_[v] != 0; }

  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryFace>& faces() const { return faces_; }
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }

  double triangle_area() const { return 0.5 * h_ * h_; }
  double area() const { return triangle_area() * static_cast<double>(triangles_.size()); }
  double boundary_measure() const;
  double boundary_weight_total() const;
  /// Number of 4-connected components of inside cells.
  int cell_components() const { return cell_components_; }

 private:
  friend Domain build_grid_domain(const GridMask&, double, Point, const NormalField&);

  int nx_ = 0;
  int ny_ = 0;
  double h_ = 0.0;
  Point origin_;
  std::vector<int> vertex_of_node_;
  std::vector<int> node_of_vertex_;
  std::vector<std::uint8_t> cell_inside_;
  std::vector<std::uint8_t> on_boundary_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryFace> faces_;
  std::vector<int> boundary_vertices_;
  int cell_components_ = 0;
};

/// Builds the domain; throws EmptyDomain when no cell has four inside corners.
/// When `normal` yields a direction at a face midpoint the face weight becomes
/// h*|n_face . n|, which recovers arc length on staircase approximations of
/// curved boundaries. Otherwise weight = measure = h.
Domain build_grid_domain(const GridMask& mask, double h, Point origin = {},
                         const NormalField& normal = {});

// Shape generators. All lattices are aligned so that the shape's extreme
// coordinates land on grid lines.
struct Shape {
  GridMask mask;
  double h = 0.0;
  Point origin;
  NormalField normal;
};

Shape disk_shape(double radius, double h);
Shape square_shape(double side, double h);
Shape rectangle_shape(double width, double height, double h);
/// [0,2s]^2 minus [s,2s]^2.
Shape l_shape(double s, double h);
Shape annulus_shape(double inner, double outer, double h);

Domain build(const Shape& shape);

/// Plain PBM (`P1`) bitmap followed by a `h=<spacing>` line. Row 0 of the file
/// is the top row (largest y).
Shape read_mask_file(const std::string& path);
void write_mask_file(const std::string& path, const GridMask& mask, double h);

}  // namespace robin
