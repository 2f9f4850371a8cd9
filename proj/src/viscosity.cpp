#include "robin/viscosity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include "robin/distance.hpp"
#include "robin/fields.hpp"
#include "robin/poisson.hpp"

namespace robin {

namespace {

std::vector<double> mean_gradient_norms(const Domain& dom, const ScalarField& u) {
  const auto tn = gradient_norms(dom, u.values());
  std::vector<double> sum(dom.num_vertices(), 0.0);
  std::vector<int> count(dom.num_vertices(), 0);
  const auto& tris = dom.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int v : tris[t]) {
      sum[v] += tn[t];
      ++count[v];
    }
  for (std::size_t v = 0; v < sum.size(); ++v) sum[v] /= count[v];
  return sum;
}

// Catmull-Rom bicubic over the 4x4 block around p, which must be all vertices.
std::optional<double> interpolate_cubic(const Domain& dom, std::span<const double> u, Point p) {
  const double gx = (p.x - dom.origin().x) / dom.h();
  const double gy = (p.y - dom.origin().y) / dom.h();
  const int cx = static_cast<int>(std::floor(gx));
  const int cy = static_cast<int>(std::floor(gy));
  const auto weights = [](double s, double* c) {
    c[0] = ((-s + 2.0) * s - 1.0) * s / 2.0;
    c[1] = ((3.0 * s - 5.0) * s * s + 2.0) / 2.0;
    c[2] = ((-3.0 * s + 4.0) * s + 1.0) * s / 2.0;
    c[3] = (s - 1.0) * s * s / 2.0;
  };
  double wx[4], wy[4];
  weights(gx - cx, wx);
  weights(gy - cy, wy);
  double acc = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const int v = dom.vertex_at(cx - 1 + i, cy - 1 + j);
      if (v < 0) return std::nullopt;
      acc += wx[i] * wy[j] * u[v];
    }
  return acc;
}

std::optional<double> sample_at(const Domain& dom, std::span<const double> u, Point p) {
  if (auto c = interpolate_cubic(dom, u, p)) return c;
  return interpolate(dom, u, p);
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

InfinityLaplacian infinity_laplacian(const Domain& dom, const ScalarField& u, double tol) {
  require_on(dom, u);
  const double h = dom.h();
  const auto g = vertex_gradients(dom, gradient(dom, u));
  InfinityLaplacian out{ScalarField(dom.num_vertices(), 0.0),
                        std::vector<StencilFlag>(dom.num_vertices(), StencilFlag::Ok)};
  for (int v = 0; v < static_cast<int>(dom.num_vertices()); ++v) {
    if (dom.is_boundary_vertex(v)) {
      out.flag[v] = StencilFlag::Unavailable;
      continue;
    }
    const double gn = norm(g[v]);
    if (gn <= tol) {
      out.flag[v] = StencilFlag::SmallGradient;
      continue;
    }
    const Point x = dom.position(v);
    const Point step = (h / gn) * g[v];
    const auto ahead = sample_at(dom, u.values(), x + step);
    const auto behind = sample_at(dom, u.values(), x - step);
    if (!ahead || !behind) {
      out.flag[v] = StencilFlag::Unavailable;
      continue;
    }
    out.value[v] = gn * gn * (*ahead - 2.0 * u[v] + *behind) / (h * h);
  }
  return out;
}

ScalarField eikonal_residual(const Domain& dom, const ScalarField& u, double lambda) {
  require_on(dom, u);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  auto r = mean_gradient_norms(dom, u);
  for (std::size_t v = 0; v < r.size(); ++v) r[v] -= lambda * u[v];
  return ScalarField(std::move(r));
}

Quantiles abs_quantiles(std::vector<double> values) {
  Quantiles q;
  q.count = values.size();
  if (values.empty()) return q;
  for (double& x : values) x = std::abs(x);
  std::sort(values.begin(), values.end());
  const auto rank = [&](double frac) {
    const auto k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(k, 1) - 1];
  };
  q.q50 = rank(0.5);
  q.q95 = rank(0.95);
  q.sup = values.back();
  return q;
}

ResidualReport limit_pde_residual(const Domain& dom, const ScalarField& u, double lambda, double beta,
                                  const ResidualOptions& opts) {
  require_on(dom, u);
  if (u.min() <= 0.0) throw NonpositiveField("limit_pde_residual needs u > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const std::size_t n = dom.num_vertices();
  const double h = dom.h();

  ResidualReport rep;
  rep.masked.assign(n, 0);
  const auto ridge = ridge_set(dom, distance_field(dom));
  const int k = opts.ridge_dilation;
  for (int m : ridge.members) {
    const auto [ix, iy] = dom.lattice(m);
    for (int dy = -k; dy <= k; ++dy)
      for (int dx = -k; dx <= k; ++dx) {
        const int w = dom.vertex_at(ix + dx, iy + dy);
        if (w >= 0) rep.masked[w] = 1;
      }
  }
  if (!opts.support.empty()) {
    if (opts.support.size() != n) throw DomainMismatch("support mask does not match the domain");
    for (int v = 0; v < static_cast<int>(n); ++v)
      for (int w : cell_neighbours(dom, v))
        if (opts.support[w] != opts.support[v]) rep.masked[v] = 1;
  }
  std::vector<std::uint8_t> edge_mask(rep.masked);

  const auto lap = infinity_laplacian(dom, u, opts.gradient_tol);
  const auto eik = eikonal_residual(dom, u, lambda);
  std::vector<double> interior(n, 0.0), samples;
  for (std::size_t v = 0; v < n; ++v) {
    if (dom.is_boundary_vertex(static_cast<int>(v))) continue;
    if (lap.flag[v] == StencilFlag::Unavailable) {
      rep.masked[v] = 1;
      continue;
    }
    interior[v] = std::min(eik[v], -lap.value[v]);
    if (!rep.masked[v]) samples.push_back(interior[v]);
  }
  rep.interior_residual = ScalarField(std::move(interior));
  rep.interior = abs_quantiles(std::move(samples));

  samples.clear();
  rep.boundary_residual.assign(dom.faces().size(), 0.0);
  rep.face_masked.assign(dom.faces().size(), 0);
  for (std::size_t i = 0; i < dom.faces().size(); ++i) {
    const auto& f = dom.faces()[i];
    const double um = 0.5 * (u[f.a] + u[f.b]);
    std::optional<double> inner;
    if (f.inner_a >= 0 && f.inner_b >= 0)
      inner = 0.5 * (u[f.inner_a] + u[f.inner_b]);
    else
      inner = interpolate(dom, u.values(), f.midpoint - h * f.normal);
    if (!inner || edge_mask[f.a] || edge_mask[f.b]) rep.face_masked[i] = 1;
    if (!inner) continue;
    const double dnu = (um - *inner) / h;
    const double tangential = (u[f.b] - u[f.a]) / h;
    const double grad = std::hypot(dnu, tangential);
    rep.boundary_residual[i] = -std::min(grad - beta * um, -dnu);
    if (!rep.face_masked[i]) samples.push_back(rep.boundary_residual[i]);
  }
  rep.boundary = abs_quantiles(std::move(samples));
  for (std::size_t v = 0; v < n; ++v)
    if (rep.masked[v]) rep.masked_vertices.push_back(static_cast<int>(v));
  return rep;
}

void write_residual_csvs(const std::string& stem, const Domain& dom, const ResidualReport& rep) {
  write_field_csv(stem + "_interior.csv", dom, rep.interior_residual);
  std::vector<double> mask(rep.masked.begin(), rep.masked.end());
  write_field_csv(stem + "_mask.csv", dom, ScalarField(std::move(mask)));
  std::ofstream out(stem + "_faces.csv");
  if (!out) throw std::runtime_error("cannot write " + stem + "_faces.csv");
  out << "ax,ay,bx,by,residual,masked\n";
  for (std::size_t i = 0; i < dom.faces().size(); ++i) {
    const auto& f = dom.faces()[i];
    const auto a = dom.lattice(f.a);
    const auto b = dom.lattice(f.b);
    out << a[0] << ',' << a[1] << ',' << b[0] << ',' << b[1] << ',' << shortest(rep.boundary_residual[i]) << ','
        << int(rep.face_masked[i]) << '\n';
  }
}

}  // namespace robin
