#include "robin/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robin {

namespace {

constexpr std::int64_t kNone = -1;

// Intersection abscissa of two parabolas kept as an exact fraction num/den, den > 0.
struct Fraction {
  std::int64_t num;
  std::int64_t den;
};

bool less_equal(const Fraction& a, const Fraction& b) {
  return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
}

// Lower envelope of q -> (q - v)^2 + f[v] over the finite entries of f
// (kNone marks absent sites). Writes the minimum and its argmin v.
void envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out, std::vector<int>& arg) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v;
  std::vector<Fraction> z;
  v.reserve(n);
  z.reserve(n + 1);
  for (int q = 0; q < n; ++q) {
    if (f[q] == kNone) continue;
    while (!v.empty()) {
      const int r = v.back();
      const Fraction s{(f[q] + static_cast<std::int64_t>(q) * q) - (f[r] + static_cast<std::int64_t>(r) * r),
                       2 * static_cast<std::int64_t>(q - r)};
      if (v.size() > 1 && less_equal(s, z.back())) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      z.push_back(s);
      break;
    }
    v.push_back(q);
  }
  if (v.empty()) {
    std::fill(out.begin(), out.end(), kNone);
    std::fill(arg.begin(), arg.end(), -1);
    return;
  }
  // z[k] separates v[k] and v[k+1].
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k < z.size() && static_cast<__int128>(z[k].num) < static_cast<__int128>(q) * z[k].den) ++k;
    const std::int64_t dq = q - v[k];
    out[q] = dq * dq + f[v[k]];
    arg[q] = v[k];
  }
}

}  // namespace

std::vector<BoundaryPoint> boundary_points(const Domain& dom) {
  std::vector<BoundaryPoint> pts;
  pts.reserve(dom.boundary_vertices().size() + dom.faces().size());
  for (int v : dom.boundary_vertices()) {
    const auto [ix, iy] = dom.lattice(v);
    pts.push_back({2 * ix, 2 * iy, dom.position(v)});
  }
  for (const auto& f : dom.faces()) {
    const auto [ax, ay] = dom.lattice(f.a);
    const auto [bx, by] = dom.lattice(f.b);
    pts.push_back({ax + bx, ay + by, f.midpoint});
  }
  return pts;
}

DistanceResult distance_field(const Domain& dom) {
  DistanceResult res;
  res.points = boundary_points(dom);
  const int nqx = 2 * dom.nx() - 1;
  const int nqy = 2 * dom.ny() - 1;
  std::vector<int> site(static_cast<std::size_t>(nqx) * nqy, -1);
  for (std::size_t i = 0; i < res.points.size(); ++i)
    site[static_cast<std::size_t>(res.points[i].qy) * nqx + res.points[i].qx] = static_cast<int>(i);

  // Rows first: distance along x to the nearest site in the same row.
  std::vector<std::int64_t> row_d(site.size());
  std::vector<int> row_site(site.size(), -1);
  {
    std::vector<std::int64_t> f(nqx);
    std::vector<std::int64_t> out(nqx);
    std::vector<int> arg(nqx);
    for (int qy = 0; qy < nqy; ++qy) {
      const std::size_t base = static_cast<std::size_t>(qy) * nqx;
      for (int qx = 0; qx < nqx; ++qx) f[qx] = site[base + qx] >= 0 ? 0 : kNone;
      envelope_1d(f, out, arg);
      for (int qx = 0; qx < nqx; ++qx) {
        row_d[base + qx] = out[qx];
        row_site[base + qx] = arg[qx] >= 0 ? site[base + arg[qx]] : -1;
      }
    }
  }
  // Columns, only at vertex abscissae (even qx) since only vertices are queried.
  std::vector<std::int64_t> col_d(site.size(), kNone);
  std::vector<int> col_site(site.size(), -1);
  {
    std::vector<std::int64_t> f(nqy);
    std::vector<std::int64_t> out(nqy);
    std::vector<int> arg(nqy);
    for (int qx = 0; qx < nqx; qx += 2) {
      for (int qy = 0; qy < nqy; ++qy) f[qy] = row_d[static_cast<std::size_t>(qy) * nqx + qx];
      envelope_1d(f, out, arg);
      for (int qy = 0; qy < nqy; ++qy) {
        const std::size_t idx = static_cast<std::size_t>(qy) * nqx + qx;
        col_d[idx] = out[qy];
        col_site[idx] = arg[qy] >= 0 ? row_site[static_cast<std::size_t>(arg[qy]) * nqx + qx] : -1;
      }
    }
  }

  const std::size_t nv = dom.num_vertices();
  std::vector<double> d(nv);
  res.nearest.resize(nv);
  res.dist2.resize(nv);
  const double half_h = 0.5 * dom.h();
  for (std::size_t v = 0; v < nv; ++v) {
    const auto [ix, iy] = dom.lattice(static_cast<int>(v));
    const std::size_t idx = static_cast<std::size_t>(2 * iy) * nqx + 2 * ix;
    res.dist2[v] = col_d[idx];
    res.nearest[v] = col_site[idx];
    d[v] = std::sqrt(static_cast<double>(col_d[idx])) * half_h;
  }
  res.d = ScalarField(std::move(d));
  res.grad = gradient(dom, res.d);
  return res;
}

double inradius(const DistanceResult& dist) { return dist.d.max(); }
double inradius(const Domain& dom) { return inradius(distance_field(dom)); }

double lambda_infinity_from_inradius(double r, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(r >= 0.0)) throw std::invalid_argument("inradius must be nonnegative");
  return 1.0 / (1.0 / beta + r);
}

double lambda_infinity(const Domain& dom, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  return lambda_infinity_from_inradius(inradius(dom), beta);
}

double default_ridge_tol(const Domain& dom) { return 1.5 * dom.h(); }

RidgeSet ridge_set(const Domain& dom, const DistanceResult& dist) {
  return ridge_set(dom, dist, default_ridge_tol(dom));
}

RidgeSet ridge_set(const Domain& dom, const DistanceResult& dist, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("ridge tolerance must be positive");
  RidgeSet ridge;
  ridge.tol = tol;
  const std::size_t nv = dom.num_vertices();
  ridge.is_member.assign(nv, 0);

  // Every boundary point realizing each vertex's distance exactly, by exhaustive scan.
  std::vector<std::vector<int>> ties(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto [ix, iy] = dom.lattice(static_cast<int>(v));
    for (std::size_t i = 0; i < dist.points.size(); ++i) {
      const std::int64_t ex = dist.points[i].qx - 2 * ix;
      const std::int64_t ey = dist.points[i].qy - 2 * iy;
      if (ex * ex + ey * ey == dist.dist2[v]) ties[v].push_back(static_cast<int>(i));
    }
  }

  const double sep = tol / (0.5 * dom.h());
  const double sep2 = sep * sep;
  for (std::size_t v = 0; v < nv; ++v) {
    // Within tol of the boundary the staircase corners themselves create
    // sub-resolution branches; those are not resolved.
    if (static_cast<double>(dist.dist2[v]) <= sep2) continue;
    const auto [ix, iy] = dom.lattice(static_cast<int>(v));
    const int qx = 2 * ix;
    const int qy = 2 * iy;
    const int around[5] = {static_cast<int>(v), dom.vertex_at(ix - 1, iy), dom.vertex_at(ix + 1, iy),
                           dom.vertex_at(ix, iy - 1), dom.vertex_at(ix, iy + 1)};
    bool member = false;
    for (int b1 : ties[v]) {
      const auto& p1 = dist.points[b1];
      for (int y : around) {
        if (y < 0 || member) continue;
        for (int b2 : ties[y]) {
          const auto& p2 = dist.points[b2];
          const std::int64_t dot12 = static_cast<std::int64_t>(p1.qx - qx) * (p2.qx - qx) +
                                     static_cast<std::int64_t>(p1.qy - qy) * (p2.qy - qy);
          const double sx = p1.qx - p2.qx;
          const double sy = p1.qy - p2.qy;
          if (dot12 <= 0 && sx * sx + sy * sy > sep2) {
            member = true;
            break;
          }
        }
      }
      if (member) break;
    }
    if (member) {
      ridge.is_member[v] = 1;
      ridge.members.push_back(static_cast<int>(v));
    }
  }
  const auto vg = vertex_gradients(dom, dist.grad);
  for (std::size_t v = 0; v < nv; ++v) {
    if (!dom.is_boundary_vertex(static_cast<int>(v)) && norm(vg[v]) < 0.5)
      ridge.gradient_drop.push_back(static_cast<int>(v));
  }
  return ridge;
}

std::vector<Point> vertex_gradients(const Domain& dom, const std::vector<Point>& tri_grad) {
  std::vector<Point> sum(dom.num_vertices());
  std::vector<int> count(dom.num_vertices(), 0);
  const auto& tris = dom.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int v : tris[t]) {
      sum[v] = sum[v] + tri_grad[t];
      ++count[v];
    }
  }
  for (std::size_t v = 0; v < sum.size(); ++v)
    if (count[v] > 0) sum[v] = (1.0 / count[v]) * sum[v];
  return sum;
}

RidgeTrace trace_to_ridge(const Domain& dom, const DistanceResult& dist, const RidgeSet& ridge, int start) {
  if (start < 0 || static_cast<std::size_t>(start) >= dom.num_vertices())
    throw std::invalid_argument("start vertex out of range");
  if (ridge.is_member[start]) throw std::invalid_argument("start vertex lies on the ridge");
  const auto vg = vertex_gradients(dom, dist.grad);
  std::vector<double> gx(vg.size());
  std::vector<double> gy(vg.size());
  for (std::size_t i = 0; i < vg.size(); ++i) {
    gx[i] = vg[i].x;
    gy[i] = vg[i].y;
  }
  if (norm(vg[start]) < 0.5) throw NoProgress("|grad d| < 1/2 at the start vertex");

  const double h = dom.h();
  const double step = 0.5 * h;
  RidgeTrace tr;
  Point x = dom.position(start);
  tr.path.push_back(x);
  const int max_steps = 4 * (dom.nx() + dom.ny());
  auto nearest_vertex = [&](Point p) {
    const int ix = static_cast<int>(std::lround((p.x - dom.origin().x) / h));
    const int iy = static_cast<int>(std::lround((p.y - dom.origin().y) / h));
    return dom.vertex_at(ix, iy);
  };
  int reached = -1;
  for (int k = 0; k < max_steps; ++k) {
    const auto ax = interpolate(dom, gx, x);
    const auto ay = interpolate(dom, gy, x);
    if (!ax || !ay) throw NoProgress("gradient path left the domain");
    const Point g{*ax, *ay};
    const double len = norm(g);
    if (len < 1e-12) throw NoProgress("gradient vanished before reaching the ridge");
    x = x + (step / len) * g;
    tr.path.push_back(x);
    tr.length += step;
    const int nv = nearest_vertex(x);
    if (nv >= 0 && ridge.is_member[nv]) {
      reached = nv;
      break;
    }
  }
  if (reached < 0) throw NoProgress("ridge not reached within the step budget");
  tr.endpoint = x;
  tr.end_vertex = reached;
  const Point chord = tr.endpoint - tr.path.front();
  const double clen = norm(chord);
  for (const auto& p : tr.path) {
    const Point r = p - tr.path.front();
    const double dev = clen > 0 ? std::abs(r.x * chord.y - r.y * chord.x) / clen : norm(r);
    tr.max_deviation = std::max(tr.max_deviation, dev);
  }
  return tr;
}

}  // namespace robin
