#pragma once

#include <span>

#include "robin/domain.hpp"

namespace robin::detail {

/// Adds the transpose of the triangle gradient operator applied to v:
/// out[i] += v . d(grad_t w)/d(w_i).
inline void scatter_gradient(const Domain& dom, std::size_t t, Point v, std::span<double> out) {
  const auto& [a, b, c] = dom.triangles()[t];
  const double sx = v.x / dom.h();
  const double sy = v.y / dom.h();
  if (t % 2 == 0) {
    out[a] -= sx;
    out[b] += sx - sy;
    out[c] += sy;
  } else {
    out[a] -= sy;
    out[b] += sx;
    out[c] += sy - sx;
  }
}

inline Point triangle_gradient(const Domain& dom, std::size_t t, std::span<const double> w) {
  const auto& [a, b, c] = dom.triangles()[t];
  const double inv_h = 1.0 / dom.h();
  if (t % 2 == 0) return {(w[b] - w[a]) * inv_h, (w[c] - w[b]) * inv_h};
  return {(w[b] - w[c]) * inv_h, (w[c] - w[a]) * inv_h};
}

}  // namespace robin::detail
