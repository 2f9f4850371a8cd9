#include "robin/scalar_field.hpp"

#include <algorithm>

namespace robin {

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) throw DomainMismatch("field sizes differ");
  ScalarField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) throw DomainMismatch("field sizes differ");
  ScalarField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

void require_on(const Domain& dom, const ScalarField& w) {
  if (w.size() != dom.num_vertices()) throw DomainMismatch("field does not live on this domain");
}

std::vector<Point> gradient(const Domain& dom, std::span<const double> values) {
  const double inv_h = 1.0 / dom.h();
  std::vector<Point> g(dom.num_triangles());
  const auto& tris = dom.triangles();
  // Lower triangles are (v00, v10, v11), upper ones (v00, v11, v01).
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& [a, b, c] = tris[t];
    if (t % 2 == 0) {
      g[t] = {(values[b] - values[a]) * inv_h, (values[c] - values[b]) * inv_h};
    } else {
      g[t] = {(values[b] - values[c]) * inv_h, (values[c] - values[a]) * inv_h};
    }
  }
  return g;
}

std::optional<double> interpolate(const Domain& dom, std::span<const double> values, Point p) {
  const double gx = (p.x - dom.origin().x) / dom.h();
  const double gy = (p.y - dom.origin().y) / dom.h();
  int cx = static_cast<int>(std::floor(gx));
  int cy = static_cast<int>(std::floor(gy));
  // Points on the far grid line belong to the last cell.
  if (cx == dom.nx() - 1 && gx - cx < 1e-12) --cx;
  if (cy == dom.ny() - 1 && gy - cy < 1e-12) --cy;
  if (!dom.cell_inside(cx, cy)) {
    // Points exactly on a cell edge may belong to an inside neighbour.
    const double fx = gx - std::floor(gx);
    const double fy = gy - std::floor(gy);
    bool found = false;
    for (int dx = 0; dx >= -1 && !found; --dx) {
      for (int dy = 0; dy >= -1 && !found; --dy) {
        if ((dx == -1 && fx > 1e-12) || (dy == -1 && fy > 1e-12)) continue;
        if (dom.cell_inside(cx + dx, cy + dy)) {
          cx += dx;
          cy += dy;
          found = true;
        }
      }
    }
    if (!found) return std::nullopt;
  }
  const double s = std::clamp(gx - cx, 0.0, 1.0);
  const double t = std::clamp(gy - cy, 0.0, 1.0);
  const double v00 = values[dom.vertex_at(cx, cy)];
  const double v10 = values[dom.vertex_at(cx + 1, cy)];
  const double v01 = values[dom.vertex_at(cx, cy + 1)];
  const double v11 = values[dom.vertex_at(cx + 1, cy + 1)];
  return (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 + s * t * v11;
}

}  // namespace robin
