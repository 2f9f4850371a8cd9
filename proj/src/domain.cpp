#include "robin/domain.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace robin {

double norm(Point a) { return std::hypot(a.x, a.y); }

double Domain::boundary_measure() const {
  double total = 0.0;
  for (const auto& f : faces_) total += f.measure;
  return total;
}

double Domain::boundary_weight_total() const {
  double total = 0.0;
  for (const auto& f : faces_) total += f.weight;
  return total;
}

Domain build_grid_domain(const GridMask& mask, double h, Point origin, const NormalField& normal) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (mask.nx < 2 || mask.ny < 2 ||
      mask.inside.size() != static_cast<std::size_t>(mask.nx) * mask.ny) {
    throw EmptyDomain("mask is smaller than one cell or has inconsistent size");
  }

  Domain dom;
  dom.nx_ = mask.nx;
  dom.ny_ = mask.ny;
  dom.h_ = h;
  dom.origin_ = origin;
  const int ncx = mask.nx - 1;
  const int ncy = mask.ny - 1;

  dom.cell_inside_.assign(static_cast<std::size_t>(ncx) * ncy, 0);
  std::vector<std::uint8_t> used(mask.inside.size(), 0);
  bool any = false;
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      if (mask.at(cx, cy) && mask.at(cx + 1, cy) && mask.at(cx, cy + 1) && mask.at(cx + 1, cy + 1)) {
        dom.cell_inside_[static_cast<std::size_t>(cy) * ncx + cx] = 1;
        any = true;
        for (int dy = 0; dy <= 1; ++dy)
          for (int dx = 0; dx <= 1; ++dx)
            used[static_cast<std::size_t>(cy + dy) * mask.nx + cx + dx] = 1;
      }
    }
  }
  if (!any) throw EmptyDomain("mask contains no cell with four inside corners");

  dom.vertex_of_node_.assign(mask.inside.size(), -1);
  for (std::size_t node = 0; node < used.size(); ++node) {
    if (used[node]) {
      dom.vertex_of_node_[node] = static_cast<int>(dom.node_of_vertex_.size());
      dom.node_of_vertex_.push_back(static_cast<int>(node));
    }
  }
  dom.on_boundary_.assign(dom.node_of_vertex_.size(), 0);

  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      if (!dom.cell_inside(cx, cy)) continue;
      const int v00 = dom.vertex_at(cx, cy);
      const int v10 = dom.vertex_at(cx + 1, cy);
      const int v01 = dom.vertex_at(cx, cy + 1);
      const int v11 = dom.vertex_at(cx + 1, cy + 1);
      dom.triangles_.push_back({v00, v10, v11});
      dom.triangles_.push_back({v00, v11, v01});
    }
  }

  // Faces: for each inside cell, each side whose neighbouring cell is not inside.
  auto add_face = [&](int a, int b, int ia, int ib, Point n) {
    BoundaryFace f;
    f.a = a;
    f.b = b;
    f.inner_a = ia;
    f.inner_b = ib;
    f.normal = n;
    f.midpoint = 0.5 * (dom.position(a) + dom.position(b));
    f.measure = h;
    f.weight = h;
    if (normal) {
      if (auto nt = normal(f.midpoint)) {
        const double len = norm(*nt);
        if (len > 0.0) f.weight = h * std::abs(dot(n, *nt)) / len;
      }
    }
    dom.faces_.push_back(f);
    dom.on_boundary_[a] = 1;
    dom.on_boundary_[b] = 1;
  };
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      if (!dom.cell_inside(cx, cy)) continue;
      const int v00 = dom.vertex_at(cx, cy);
      const int v10 = dom.vertex_at(cx + 1, cy);
      const int v01 = dom.vertex_at(cx, cy + 1);
      const int v11 = dom.vertex_at(cx + 1, cy + 1);
      if (!dom.cell_inside(cx, cy - 1)) add_face(v00, v10, v01, v11, {0.0, -1.0});
      if (!dom.cell_inside(cx + 1, cy)) add_face(v10, v11, v00, v01, {1.0, 0.0});
      if (!dom.cell_inside(cx, cy + 1)) add_face(v11, v01, v10, v00, {0.0, 1.0});
      if (!dom.cell_inside(cx - 1, cy)) add_face(v01, v00, v11, v10, {-1.0, 0.0});
    }
  }
  for (std::size_t v = 0; v < dom.on_boundary_.size(); ++v)
    if (dom.on_boundary_[v]) dom.boundary_vertices_.push_back(static_cast<int>(v));

  // Connectivity is informational only; Omega may have several components.
  std::vector<int> label(dom.cell_inside_.size(), -1);
  for (std::size_t start = 0; start < label.size(); ++start) {
    if (!dom.cell_inside_[start] || label[start] >= 0) continue;
    const int id = dom.cell_components_++;
    std::queue<std::size_t> q;
    q.push(start);
    label[start] = id;
    while (!q.empty()) {
      const std::size_t c = q.front();
      q.pop();
      const int cx = static_cast<int>(c % ncx);
      const int cy = static_cast<int>(c / ncx);
      const int nbr[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
      for (const auto& nb : nbr) {
        if (!dom.cell_inside(nb[0], nb[1])) continue;
        const std::size_t n = static_cast<std::size_t>(nb[1]) * ncx + nb[0];
        if (label[n] < 0) {
          label[n] = id;
          q.push(n);
        }
      }
    }
  }
  return dom;
}

namespace {

int cells_for(double length, double h) {
  const double n = length / h;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument("shape extent must be a positive multiple of h");
  }
  return static_cast<int>(r);
}

Shape lattice_shape(int cells_x, int cells_y, double h, Point origin) {
  Shape s;
  s.h = h;
  s.origin = origin;
  s.mask.nx = cells_x + 1;
  s.mask.ny = cells_y + 1;
  s.mask.inside.assign(static_cast<std::size_t>(s.mask.nx) * s.mask.ny, 0);
  return s;
}

template <typename Pred>
void fill(Shape& s, Pred inside) {
  for (int iy = 0; iy < s.mask.ny; ++iy)
    for (int ix = 0; ix < s.mask.nx; ++ix)
      s.mask.inside[static_cast<std::size_t>(iy) * s.mask.nx + ix] =
          inside(ix, iy, Point{s.origin.x + s.h * ix, s.origin.y + s.h * iy}) ? 1 : 0;
}

}  // namespace

Shape disk_shape(double radius, double h) {
  if (!(radius > 0.0) || !(h > 0.0)) throw std::invalid_argument("disk needs positive radius and h");
  const double cells = radius / h;
  const bool exact = std::abs(cells - std::round(cells)) <= 1e-9 * std::max(1.0, cells);
  const int n = exact ? cells_for(radius, h) : static_cast<int>(std::ceil(cells + 0.5));
  Shape s = lattice_shape(2 * n, 2 * n, h, {-n * h, -n * h});
  // Vertices within half a cell of the disk: the inside cells then have
  // area pi r^2 + O(h^2) instead of a one-sided O(h) deficit.
  const double reach = (exact ? n : cells) + 0.5;
  fill(s, [&](int ix, int iy, Point) {
    const double dx = ix - n;
    const double dy = iy - n;
    return dx * dx + dy * dy <= reach * reach;
  });
  s.normal = [](Point p) -> std::optional<Point> {
    if (norm(p) == 0.0) return std::nullopt;
    return p;
  };
  return s;
}

Shape rectangle_shape(double width, double height, double h) {
  Shape s = lattice_shape(cells_for(width, h), cells_for(height, h), h, {0.0, 0.0});
  fill(s, [](int, int, Point) { return true; });
  return s;
}

Shape square_shape(double side, double h) { return rectangle_shape(side, side, h); }

Shape l_shape(double side, double h) {
  const int n = cells_for(side, h);
  Shape s = lattice_shape(2 * n, 2 * n, h, {0.0, 0.0});
  fill(s, [&](int ix, int iy, Point) { return ix <= n || iy <= n; });
  return s;
}

Shape annulus_shape(double inner, double outer, double h) {
  if (!(inner > 0.0 && inner < outer)) throw std::invalid_argument("annulus needs 0 < inner < outer");
  const int n = cells_for(outer, h);
  const double ri = inner / h - 0.5;
  const double ro = n + 0.5;
  Shape s = lattice_shape(2 * n, 2 * n, h, {-outer, -outer});
  fill(s, [&](int ix, int iy, Point) {
    const double dx = ix - n;
    const double dy = iy - n;
    const double r2 = dx * dx + dy * dy;
    return r2 <= ro * ro && r2 >= ri * ri;
  });
  const double mid = 0.5 * (inner + outer);
  s.normal = [mid](Point p) -> std::optional<Point> {
    const double r = norm(p);
    if (r == 0.0) return std::nullopt;
    return r > mid ? p : Point{-p.x, -p.y};
  };
  return s;
}

Domain build(const Shape& shape) { return build_grid_domain(shape.mask, shape.h, shape.origin, shape.normal); }

Shape read_mask_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mask file " + path);
  std::string content;
  std::string line;
  std::optional<double> h;
  while (std::getline(in, line)) {
    if (const auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    if (const auto pos = line.find("h="); pos != std::string::npos) {
      h = std::stod(line.substr(pos + 2));
      line.erase(pos);
    }
    content += line;
    content += '\n';
  }
  std::istringstream ss(content);
  std::string magic;
  ss >> magic;
  if (magic != "P1") throw std::runtime_error(path + ": expected P1 bitmap header");
  int w = 0;
  int ht = 0;
  if (!(ss >> w >> ht) || w < 2 || ht < 2) throw std::runtime_error(path + ": bad bitmap dimensions");
  if (!h) throw std::runtime_error(path + ": missing h=<spacing> line");
  Shape s;
  s.h = *h;
  s.mask.nx = w;
  s.mask.ny = ht;
  s.mask.inside.assign(static_cast<std::size_t>(w) * ht, 0);
  // Bits may be packed without separators, as plain PBM allows.
  for (int row = 0; row < ht; ++row) {
    for (int ix = 0; ix < w; ++ix) {
      char c = 0;
      do {
        if (!ss.get(c)) throw std::runtime_error(path + ": truncated bitmap");
      } while (c != '0' && c != '1');
      const int iy = ht - 1 - row;
      s.mask.inside[static_cast<std::size_t>(iy) * w + ix] = c == '1' ? 1 : 0;
    }
  }
  return s;
}

void write_mask_file(const std::string& path, const GridMask& mask, double h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mask file " + path);
  out << "P1\n" << mask.nx << ' ' << mask.ny << '\n';
  for (int row = 0; row < mask.ny; ++row) {
    const int iy = mask.ny - 1 - row;
    for (int ix = 0; ix < mask.nx; ++ix) out << (ix ? " " : "") << (mask.at(ix, iy) ? '1' : '0');
    out << '\n';
  }
  std::ostringstream hs;
  hs.precision(17);
  hs << h;
  out << "h=" << hs.str() << '\n';
}

}  // namespace robin
