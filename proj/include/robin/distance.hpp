#pragma once

#include <cstdint>
#include <vector>

#include "robin/domain.hpp"
#include "robin/scalar_field.hpp"

namespace robin {

/// A point of the discrete boundary: a boundary vertex or a face midpoint.
/// Coordinates are on the half-spacing lattice (2*ix, 2*iy for vertices).
struct BoundaryPoint {
  int qx = 0;
  int qy = 0;
  Point pos;
};

/// Boundary vertices first (in vertex order), then face midpoints (in face order).
std::vector<BoundaryPoint> boundary_points(const Domain& dom);

struct DistanceResult {
  ScalarField d;
  std::vector<int> nearest;          // index into points
  std::vector<std::int64_t> dist2;   // squared distance in (h/2)^2 units
  std::vector<Point> grad;           // per-triangle gradient of the interpolant of d
  std::vector<BoundaryPoint> points;
};

/// Exact Euclidean distance from every vertex to the discrete boundary,
/// computed with a separable lower-envelope transform on the half lattice.
DistanceResult distance_field(const Domain& dom);

double inradius(const Domain& dom);
double inradius(const DistanceResult& dist);

/// 1 / (1/beta + R); throws std::invalid_argument for beta <= 0.
double lambda_infinity(const Domain& dom, double beta);
double lambda_infinity_from_inradius(double inradius, double beta);

struct RidgeSet {
  std::vector<int> members;          // sorted vertex indices
  std::vector<std::uint8_t> is_member;
  double tol = 0.0;
  /// Vertices whose averaged |grad d| falls below 1/2 (cross-check only).
  std::vector<int> gradient_drop;
};

/// Default multiplicity tolerance, 1.5 h.
double default_ridge_tol(const Domain& dom);

/// A vertex x is a ridge member when it has two nearly-realizing boundary
/// points b1, b2 with |b1 - b2| > tol that subtend a right or obtuse angle at
/// x. b1 realizes d(x) exactly; b2 realizes the distance of x or of one of its
/// four lattice neighbours, hence |x - b2| <= d(x) + h. Exact ties are found
/// by an exhaustive scan of the boundary point list, so the set does not
/// depend on how the transform breaks ties. Vertices with d <= tol are never
/// members.
RidgeSet ridge_set(const Domain& dom, const DistanceResult& dist, double tol);
RidgeSet ridge_set(const Domain& dom, const DistanceResult& dist);

class NoProgress : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RidgeTrace {
  Point endpoint;
  int end_vertex = -1;
  double length = 0.0;
  std::vector<Point> path;
  double max_deviation = 0.0;  // distance of path points from the start-end chord
};

/// Per-vertex gradient of d, averaged over incident triangles.
std::vector<Point> vertex_gradients(const Domain& dom, const std::vector<Point>& tri_grad);

/// Follows grad d from vertex `start` in steps of h/2 until the nearest
/// lattice vertex is a ridge member.
RidgeTrace trace_to_ridge(const Domain& dom, const DistanceResult& dist, const RidgeSet& ridge, int start);

}  // namespace robin
