#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robin/distance.hpp"
#include "robin/domain.hpp"

using namespace robin;

namespace {

int vertex_near(const Domain& dom, Point p) {
  const int ix = static_cast<int>(std::lround((p.x - dom.origin().x) / dom.h()));
  const int iy = static_cast<int>(std::lround((p.y - dom.origin().y) / dom.h()));
  return dom.vertex_at(ix, iy);
}

double dist_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

TEST_CASE("3x3 mask gives four unit cells and eight faces") {
  GridMask m{3, 3, std::vector<std::uint8_t>(9, 1)};
  const Domain dom = build_grid_domain(m, 1.0);
  CHECK(dom.area() == 4.0);
  CHECK(dom.faces().size() == 8);
  CHECK(dom.num_vertices() == 9);
  CHECK(dom.num_triangles() == 8);
  CHECK(dom.boundary_vertices().size() == 8);
  CHECK(dom.boundary_measure() == 8.0);
}

TEST_CASE("empty and degenerate masks are rejected") {
  GridMask none{4, 4, std::vector<std::uint8_t>(16, 0)};
  CHECK_THROWS_AS(build_grid_domain(none, 0.1), EmptyDomain);
  // A checkerboard has inside vertices but no inside cell.
  GridMask checker{4, 4, {}};
  for (int i = 0; i < 16; ++i) checker.inside.push_back(((i % 4) + (i / 4)) % 2);
  CHECK_THROWS_AS(build_grid_domain(checker, 0.1), EmptyDomain);
  GridMask full{3, 3, std::vector<std::uint8_t>(9, 1)};
  CHECK_THROWS_AS(build_grid_domain(full, 0.0), std::invalid_argument);
}

TEST_CASE("disk area converges to pi") {
  const Domain dom = build(disk_shape(1.0, 1.0 / 64));
  CHECK(dom.nx() == 129);
  // Oracle: pi, independent of the cell count.
  CHECK(std::abs(dom.area() - M_PI) / M_PI < 0.02);
  // Staircase faces weighted by |n_face . n| recover the circumference.
  CHECK(dom.boundary_weight_total() == doctest::Approx(2 * M_PI).epsilon(0.01));
}

TEST_CASE("disconnected masks are allowed") {
  GridMask m{7, 3, std::vector<std::uint8_t>(21, 1)};
  for (int iy = 0; iy < 3; ++iy) m.inside[iy * 7 + 3] = 0;
  const Domain dom = build_grid_domain(m, 0.5);
  CHECK(dom.cell_components() == 2);
  CHECK(dom.area() == doctest::Approx(8 * 0.25));
}

TEST_CASE("faces separate inside cells from outside and rectangles are exact") {
  const Domain dom = build(rectangle_shape(2.0, 1.0, 1.0 / 16));
  CHECK(dom.boundary_measure() == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(dom.area() == doctest::Approx(2.0).epsilon(1e-14));
  for (const auto& f : dom.faces()) {
    const Point inward_probe = f.midpoint - (0.25 * dom.h()) * f.normal;
    const Point outward_probe = f.midpoint + (0.25 * dom.h()) * f.normal;
    auto cell_of = [&](Point p) {
      return dom.cell_inside(static_cast<int>(std::floor((p.x - dom.origin().x) / dom.h())),
                             static_cast<int>(std::floor((p.y - dom.origin().y) / dom.h())));
    };
    CHECK(cell_of(inward_probe));
    CHECK_FALSE(cell_of(outward_probe));
    CHECK(f.measure == dom.h());
    CHECK(f.weight == dom.h());
  }
}

TEST_CASE("distance field spot values") {
  const double h = 1.0 / 64;
  SUBCASE("disk centre") {
    const Domain dom = build(disk_shape(1.0, h));
    const auto dist = distance_field(dom);
    const int c = vertex_near(dom, {0.0, 0.0});
    CHECK(std::abs(dist.d[c] - 1.0) <= h);
    CHECK(std::abs(inradius(dist) - 1.0) <= h);
  }
  SUBCASE("unit square") {
    const Domain dom = build(square_shape(1.0, h));
    const auto dist = distance_field(dom);
    CHECK(std::abs(dist.d[vertex_near(dom, {0.5, 0.25})] - 0.25) <= h);
    for (int v : dom.boundary_vertices()) CHECK(dist.d[v] == 0.0);
  }
  SUBCASE("rectangle inradius") {
    const Domain dom = build(rectangle_shape(2.0, 1.0, h));
    CHECK(std::abs(inradius(dom) - 0.5) <= h);
  }
}

TEST_CASE("distance field equals brute force on the L-shape") {
  const Domain dom = build(l_shape(1.0, 1.0 / 32));
  const auto dist = distance_field(dom);
  const auto oracle = robin::oracle::brute_force_distance(dom);
  for (std::size_t v = 0; v < oracle.size(); ++v) REQUIRE(dist.d[v] == oracle[v]);
  CHECK(inradius(dist) == robin::oracle::brute_force_inradius(dom));
  const double r = robin::oracle::brute_force_inradius(dom);
  CHECK(lambda_infinity(dom, 1.0) == 1.0 / (1.0 + r));
}

TEST_CASE("property: distance transform is exact on random masks up to 65x65") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> size(3, 65);
  std::uniform_real_distribution<double> fill(0.3, 0.97);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const GridMask m = trial % 2 ? robin::oracle::random_noise_mask(rng, size(rng), size(rng), fill(rng))
                                 : robin::oracle::random_blob_mask(rng, size(rng) | 8);
    Domain dom;
    try {
      dom = build_grid_domain(m, 1.0 / 32);
    } catch (const EmptyDomain&) {
      continue;
    }
    const auto dist = distance_field(dom);
    const auto oracle = robin::oracle::brute_force_dist2(dom);
    for (std::size_t v = 0; v < oracle.size(); ++v) {
      REQUIRE(dist.dist2[v] == oracle[v]);
      const auto& b = dist.points[dist.nearest[v]];
      const auto [ix, iy] = dom.lattice(static_cast<int>(v));
      const std::int64_t ex = b.qx - 2 * ix;
      const std::int64_t ey = b.qy - 2 * iy;
      REQUIRE(ex * ex + ey * ey == oracle[v]);
    }
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("per-triangle |grad d| away from the ridge") {
  const double h = 1.0 / 32;
  SUBCASE("square: within [1-2h, 1]") {
    const Domain dom = build(square_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    int checked = 0;
    for (std::size_t t = 0; t < dom.num_triangles(); ++t) {
      const auto& tri = dom.triangles()[t];
      if (ridge.is_member[tri[0]] || ridge.is_member[tri[1]] || ridge.is_member[tri[2]]) continue;
      // Corner triangles straddle the unresolved part of the diagonals.
      if (std::min({dist.d[tri[0]], dist.d[tri[1]], dist.d[tri[2]]}) < ridge.tol) continue;
      const double g = norm(dist.grad[t]);
      CHECK(g <= 1.0 + 1e-12);
      CHECK(g >= 1.0 - 2 * h);
      ++checked;
    }
    CHECK(checked > 1000);
  }
  SUBCASE("disk: staircase cones perturb |grad d| by O(h/d)") {
    const Domain dom = build(disk_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    int checked = 0;
    for (std::size_t t = 0; t < dom.num_triangles(); ++t) {
      const auto& tri = dom.triangles()[t];
      if (ridge.is_member[tri[0]] || ridge.is_member[tri[1]] || ridge.is_member[tri[2]]) continue;
      const double dmin = std::min({dist.d[tri[0]], dist.d[tri[1]], dist.d[tri[2]]});
      if (dmin < 2 * h) continue;
      const double g = norm(dist.grad[t]);
      CHECK(std::abs(g - 1.0) <= 12 * h / dmin);
      ++checked;
    }
    CHECK(checked > 1000);
  }
}

TEST_CASE("lambda_infinity values and monotonicity") {
  const double h = 1.0 / 64;
  CHECK(std::abs(lambda_infinity(build(disk_shape(1.0, h)), 1.0) - 0.5) <= 0.02);
  CHECK(std::abs(lambda_infinity(build(square_shape(1.0, h)), 2.0) - 1.0) <= 0.02);
  CHECK(lambda_infinity_from_inradius(0.5, 2.0) == 1.0);
  CHECK_THROWS_AS(lambda_infinity_from_inradius(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_infinity_from_inradius(1.0, -1.0), std::invalid_argument);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.01, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double beta = pos(rng);
    const double r = pos(rng);
    const double eps = 1e-3;
    CHECK(lambda_infinity_from_inradius(r + eps, beta) < lambda_infinity_from_inradius(r, beta));
    CHECK(lambda_infinity_from_inradius(r, beta + eps) > lambda_infinity_from_inradius(r, beta));
  }
}

TEST_CASE("Faber-Krahn at infinity on random connected masks") {
  std::mt19937_64 rng(11);
  const double h = 1.0 / 32;
  const double beta = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Domain dom = build_grid_domain(robin::oracle::random_blob_mask(rng, 65), h);
    const double r_disk = std::sqrt(dom.area() / M_PI);
    const double lam = lambda_infinity(dom, beta);
    const double lam_disk = lambda_infinity_from_inradius(r_disk, beta);
    CHECK(lam >= lam_disk - h);
  }
}

namespace {

// Analytic ridge test for an axis-aligned rectangle [0,w]x[0,ht]: feet of the
// nearest sides of p and of its lattice neighbours, compared pairwise.
std::vector<Point> nearest_feet(Point p, double w, double ht) {
  const double dist[4] = {p.x, w - p.x, p.y, ht - p.y};
  const Point feet[4] = {{0.0, p.y}, {w, p.y}, {p.x, 0.0}, {p.x, ht}};
  const double d = *std::min_element(std::begin(dist), std::end(dist));
  std::vector<Point> out;
  for (int i = 0; i < 4; ++i)
    if (dist[i] <= d + 1e-12) out.push_back(feet[i]);
  return out;
}

bool rectangle_ridge_oracle(Point p, double w, double ht, double h, double tol) {
  if (std::min({p.x, w - p.x, p.y, ht - p.y}) <= tol + 1e-12) return false;
  const Point around[5] = {p, {p.x - h, p.y}, {p.x + h, p.y}, {p.x, p.y - h}, {p.x, p.y + h}};
  for (const Point& b1 : nearest_feet(p, w, ht)) {
    for (const Point& q : around) {
      if (q.x < -1e-12 || q.y < -1e-12 || q.x > w + 1e-12 || q.y > ht + 1e-12) continue;
      for (const Point& b2 : nearest_feet(q, w, ht))
        if (dot(b1 - p, b2 - p) <= 1e-12 && norm(b1 - b2) > tol) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("ridge sets") {
  const double h = 1.0 / 32;
  SUBCASE("disk: only a neighbourhood of the centre") {
    const Domain dom = build(disk_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    REQUIRE_FALSE(ridge.members.empty());
    CHECK(ridge.is_member[vertex_near(dom, {0, 0})]);
    for (int v : ridge.members) CHECK(norm(dom.position(v)) <= 2 * h);
  }
  SUBCASE("square: the two diagonals, matching the analytic oracle") {
    const Domain dom = build(square_shape(1.0, h));
    const auto ridge = ridge_set(dom, distance_field(dom));
    for (std::size_t v = 0; v < dom.num_vertices(); ++v) {
      const Point p = dom.position(static_cast<int>(v));
      CHECK(static_cast<bool>(ridge.is_member[v]) == rectangle_ridge_oracle(p, 1.0, 1.0, h, ridge.tol));
    }
    for (int v : ridge.members) {
      const Point p = dom.position(v);
      CHECK(std::min(std::abs(p.x - p.y), std::abs(p.x + p.y - 1.0)) / std::sqrt(2.0) <= h);
    }
    CHECK(ridge.members.size() > 40);
  }
  SUBCASE("rectangle 2x1: medial segment plus diagonal stubs") {
    const Domain dom = build(rectangle_shape(2.0, 1.0, h));
    const auto ridge = ridge_set(dom, distance_field(dom));
    int on_segment = 0;
    for (std::size_t v = 0; v < dom.num_vertices(); ++v) {
      const Point p = dom.position(static_cast<int>(v));
      CHECK(static_cast<bool>(ridge.is_member[v]) == rectangle_ridge_oracle(p, 2.0, 1.0, h, ridge.tol));
    }
    for (int v : ridge.members) {
      const Point p = dom.position(v);
      const double dseg = dist_to_segment(p, {0.5, 0.5}, {1.5, 0.5});
      const double dstub = std::min({dist_to_segment(p, {0, 0}, {0.5, 0.5}), dist_to_segment(p, {0, 1}, {0.5, 0.5}),
                                     dist_to_segment(p, {2, 0}, {1.5, 0.5}), dist_to_segment(p, {2, 1}, {1.5, 0.5})});
      CHECK(std::min(dseg, dstub) <= h);
      on_segment += dseg <= h;
    }
    CHECK(on_segment >= 30);
  }
}

TEST_CASE("trace_to_ridge follows straight segments") {
  const double h = 1.0 / 32;
  SUBCASE("disk radial segment") {
    const Domain dom = build(disk_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    const int start = vertex_near(dom, {0.5, 0.0});
    const auto tr = trace_to_ridge(dom, dist, ridge, start);
    CHECK(norm(tr.endpoint) <= 4 * h);
    CHECK(std::abs(tr.length - 0.5) <= 4 * h);
    CHECK(tr.max_deviation <= h);
    const double gain = *interpolate(dom, dist.d.values(), tr.endpoint) - dist.d[start];
    CHECK(std::abs(gain - tr.length) <= 2 * h);
  }
  SUBCASE("square vertical segment") {
    const Domain dom = build(square_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    const int start = vertex_near(dom, {0.5, 0.2});
    const auto tr = trace_to_ridge(dom, dist, ridge, start);
    CHECK(norm(tr.endpoint - Point{0.5, 0.5}) <= 2 * h);
    CHECK(tr.max_deviation <= h);
    for (const auto& p : tr.path) CHECK(std::abs(p.x - 0.5) <= 1e-12);
    const double gain = *interpolate(dom, dist.d.values(), tr.endpoint) - dist.d[start];
    CHECK(std::abs(gain - tr.length) <= 2 * h);
  }
  SUBCASE("errors") {
    const Domain dom = build(square_shape(1.0, h));
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    CHECK_THROWS_AS(trace_to_ridge(dom, dist, ridge, ridge.members.front()), std::invalid_argument);
  }
}

TEST_CASE("property: trace_to_ridge paths are straight from every non-ridge start") {
  const double h = 1.0 / 32;
  // On the square the flow lines are exact lattice lines. On the disk the
  // staircase tilts grad d by O(sqrt(h/r)) near-ties, so paths bend by a few h.
  const std::pair<Shape, double> cases[] = {{square_shape(1.0, h), 1.0}, {disk_shape(1.0, h), 4.0}};
  for (const auto& [shape, bound] : cases) {
    const Domain dom = build(shape);
    const auto dist = distance_field(dom);
    const auto ridge = ridge_set(dom, dist);
    const auto vg = vertex_gradients(dom, dist.grad);
    int traced = 0;
    for (std::size_t v = 0; v < dom.num_vertices(); ++v) {
      if (ridge.is_member[v] || dom.is_boundary_vertex(static_cast<int>(v))) continue;
      if (norm(vg[v]) < 0.5) {
        CHECK_THROWS_AS(trace_to_ridge(dom, dist, ridge, static_cast<int>(v)), NoProgress);
        continue;
      }
      const auto tr = trace_to_ridge(dom, dist, ridge, static_cast<int>(v));
      CHECK_MESSAGE(tr.max_deviation <= bound * h, "start ", dom.position(static_cast<int>(v)).x, ",",
                    dom.position(static_cast<int>(v)).y);
      ++traced;
    }
    CHECK(traced > 500);
  }
}

TEST_CASE("mask files round-trip") {
  const Shape s = l_shape(0.5, 1.0 / 8);
  const auto path = std::filesystem::temp_directory_path() / "robin_mask_roundtrip.pbm";
  write_mask_file(path.string(), s.mask, s.h);
  const Shape back = read_mask_file(path.string());
  CHECK(back.h == s.h);
  CHECK(back.mask.nx == s.mask.nx);
  CHECK(back.mask.inside == s.mask.inside);
  std::filesystem::remove(path);
}
