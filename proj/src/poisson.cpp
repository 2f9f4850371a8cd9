#include "robin/poisson.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "assembly.hpp"

namespace robin {

namespace {

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dotp(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gradient operator rows of triangle t: g.x = gx . (w_a, w_b, w_c), likewise g.y.
void gradient_rows(std::size_t t, double h, double gx[3], double gy[3]) {
  const double s = 1.0 / h;
  if (t % 2 == 0) {
    gx[0] = -s, gx[1] = s, gx[2] = 0.0;
    gy[0] = 0.0, gy[1] = -s, gy[2] = s;
  } else {
    gx[0] = 0.0, gx[1] = s, gx[2] = -s;
    gy[0] = -s, gy[1] = 0.0, gy[2] = s;
  }
}

// |x|^(p-2) with |x| floored at eps so the Hessian stays bounded.
double power_weight(double x, double p, double eps) {
  const double a = std::max(std::abs(x), eps);
  return std::pow(a, p - 2.0);
}

Eigen::SparseMatrix<double> hessian(const Domain& dom, std::span<const double> w, const RobinParams& rp,
                                    std::span<const double> mass, double mu) {
  const double p = rp.p;
  const double h = dom.h();
  const double area = dom.triangle_area();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(dom.num_triangles() * 9 + dom.faces().size() * 4 + w.size());
  double gmax = 0.0;
  for (std::size_t t = 0; t < dom.num_triangles(); ++t) gmax = std::max(gmax, norm(detail::triangle_gradient(dom, t, w)));
  const double eps = 1e-8 * std::max(gmax, 1e-300);
  for (std::size_t t = 0; t < dom.num_triangles(); ++t) {
    const Point g = detail::triangle_gradient(dom, t, w);
    const double gn = norm(g);
    const double c = area * power_weight(gn, p, eps);
    // c (I + (p-2) g g^T / max(|g|, eps)^2)
    const double k = gn > eps ? (p - 2.0) / (gn * gn) : 0.0;
    const double axx = c * (1.0 + k * g.x * g.x);
    const double ayy = c * (1.0 + k * g.y * g.y);
    const double axy = c * k * g.x * g.y;
    double gx[3], gy[3];
    gradient_rows(t, h, gx, gy);
    const auto& tri = dom.triangles()[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double v = gx[i] * (axx * gx[j] + axy * gy[j]) + gy[i] * (axy * gx[j] + ayy * gy[j]);
        if (v != 0.0) trips.emplace_back(tri[i], tri[j], v);
      }
  }
  double mmax = 0.0;
  for (const auto& f : dom.faces()) mmax = std::max(mmax, std::abs(0.5 * (w[f.a] + w[f.b])));
  const double meps = 1e-8 * std::max(mmax, 1e-300);
  const double bp = std::pow(rp.beta, p);
  for (const auto& f : dom.faces()) {
    const double m = 0.5 * (w[f.a] + w[f.b]);
    const double c = 0.25 * bp * f.weight * (p - 1.0) * power_weight(m, p, meps);
    trips.emplace_back(f.a, f.a, c);
    trips.emplace_back(f.a, f.b, c);
    trips.emplace_back(f.b, f.a, c);
    trips.emplace_back(f.b, f.b, c);
  }
  for (std::size_t i = 0; i < w.size(); ++i) trips.emplace_back(i, i, mu * mass[i]);
  Eigen::SparseMatrix<double> H(w.size(), w.size());
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

struct Stage {
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Damped Newton with a Levenberg shift mu * M.
Stage newton_stage(const Domain& dom, std::span<const double> f, const RobinParams& rp, std::vector<double>& w,
                   double tol, int max_iter, std::span<const double> mass) {
  Stage st;
  const std::size_t n = w.size();
  auto e = poisson_energy(dom, f, w, rp);
  // Typical diagonal-to-mass ratio of the p = 2 stiffness.
  const double mu_scale = 4.0 / (dom.h() * dom.h());
  double mu = 1e-10 * mu_scale;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  std::vector<double> d(n), wn(n);
  for (; st.iterations <= max_iter; ++st.iterations) {
    st.residual = sup_abs(e.grad);
    if (st.residual <= tol) {
      st.converged = true;
      return st;
    }
    if (st.iterations == max_iter) break;
    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      const auto H = hessian(dom, w, rp, mass, mu);
      if (!analyzed) {
        ldlt.analyzePattern(H);
        analyzed = true;
      }
      ldlt.factorize(H);
      if (ldlt.info() != Eigen::Success) {
        mu = std::max(mu * 100.0, 1e-8 * mu_scale);
        continue;
      }
      const Eigen::Map<const Eigen::VectorXd> g(e.grad.data(), n);
      const Eigen::VectorXd step = ldlt.solve(-g);
      for (std::size_t i = 0; i < n; ++i) d[i] = step[i];
      const double slope = dotp(e.grad, d);
      if (!(slope < 0.0)) {
        mu = std::max(mu * 100.0, 1e-8 * mu_scale);
        continue;
      }
      const double noise = 1e-14 * (std::abs(e.j) + 1e-300) + 1e-300;
      double a = 1.0;
      for (int bt = 0; bt < 40; ++bt, a *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) wn[i] = w[i] + a * d[i];
        auto trial = poisson_energy(dom, f, wn, rp);
        const bool armijo = trial.j <= e.j + 1e-4 * a * slope;
        const bool flat = trial.j <= e.j + noise && std::abs(dotp(trial.grad, d)) <= 0.9 * std::abs(slope);
        // J is flat to rounding near the minimizer; fall back on the residual.
        const bool settled = trial.j <= e.j + 1e-10 * (1.0 + std::abs(e.j)) && sup_abs(trial.grad) <= 0.5 * st.residual;
        if (armijo || flat || settled) {
          w.swap(wn);
          e = std::move(trial);
          stepped = true;
          break;
        }
      }
      if (stepped) {
        mu = a == 1.0 ? std::max(mu * 0.1, 1e-14 * mu_scale) : mu * 10.0;
      } else {
        mu = std::max(mu * 100.0, 1e-8 * mu_scale);
      }
    }
    if (!stepped) break;
  }
  st.residual = sup_abs(e.grad);
  st.converged = st.residual <= tol;
  return st;
}

// Polak-Ribiere conjugate gradient, preconditioned by the lumped mass.
Stage cg_stage(const Domain& dom, std::span<const double> f, const RobinParams& rp, std::vector<double>& w,
               double tol, int max_iter, std::span<const double> mass) {
  Stage st;
  const std::size_t n = w.size();
  auto e = poisson_energy(dom, f, w, rp);
  std::vector<double> z(n), d(n), wn(n), zprev(n), gprev(n);
  double step = 1.0;
  for (; st.iterations <= max_iter; ++st.iterations) {
    st.residual = sup_abs(e.grad);
    if (st.residual <= tol) {
      st.converged = true;
      return st;
    }
    if (st.iterations == max_iter) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = e.grad[i] / mass[i];
    double beta = 0.0;
    if (st.iterations > 0) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += z[i] * (e.grad[i] - gprev[i]);
        den += zprev[i] * gprev[i];
      }
      beta = std::max(0.0, num / den);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -z[i] + beta * d[i];
    double slope = dotp(e.grad, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -z[i];
      slope = dotp(e.grad, d);
    }
    const double noise = 1e-14 * std::abs(e.j) + 1e-300;
    double a = step;
    {
      // Secant on the directional derivative; exact for quadratics.
      for (std::size_t i = 0; i < n; ++i) wn[i] = w[i] + a * d[i];
      const double s1 = dotp(poisson_energy(dom, f, wn, rp).grad, d);
      if (s1 > slope) a = std::min(10.0 * a, a * slope / (slope - s1));
      else a *= 4.0;
    }
    bool ok = false;
    for (int bt = 0; bt < 80; ++bt, a *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) wn[i] = w[i] + a * d[i];
      auto trial = poisson_energy(dom, f, wn, rp);
      const bool armijo = trial.j <= e.j + 1e-4 * a * slope;
      const double s_new = std::abs(dotp(trial.grad, d));
      const bool flat = trial.j <= e.j + noise && s_new <= 0.9 * std::abs(slope);
      const bool settled = trial.j <= e.j + 1e-10 * (1.0 + std::abs(e.j)) && s_new <= 0.1 * std::abs(slope);
      if (armijo || flat || settled) {
        gprev = e.grad;
        zprev = z;
        w.swap(wn);
        e = std::move(trial);
        ok = true;
        break;
      }
    }
    if (!ok) break;
    step = a;
  }
  st.residual = sup_abs(e.grad);
  st.converged = st.residual <= tol;
  return st;
}

}  // namespace

PoissonEnergy poisson_energy(const Domain& dom, std::span<const double> f, std::span<const double> phi,
                             const RobinParams& rp, bool want_grad) {
  if (phi.size() != dom.num_vertices() || f.size() != dom.num_vertices())
    throw DomainMismatch("field does not match the domain");
  if (!rp.finite()) throw std::invalid_argument("J_p needs finite p");
  const double p = rp.p;
  const double area = dom.triangle_area();
  const double bp = std::pow(rp.beta, p);
  PoissonEnergy e;
  if (want_grad) e.grad.assign(phi.size(), 0.0);
  double grad_sum = 0.0;
  for (std::size_t t = 0; t < dom.num_triangles(); ++t) {
    const Point g = detail::triangle_gradient(dom, t, phi);
    const double gn = norm(g);
    if (gn == 0.0) continue;
    const double pm2 = std::pow(gn, p - 2.0);
    grad_sum += area * pm2 * gn * gn;
    if (want_grad) detail::scatter_gradient(dom, t, (area * pm2) * g, e.grad);
  }
  double bdry_sum = 0.0;
  for (const auto& face : dom.faces()) {
    const double m = 0.5 * (phi[face.a] + phi[face.b]);
    const double am = std::abs(m);
    if (am == 0.0) continue;
    const double pm2 = std::pow(am, p - 2.0);
    bdry_sum += face.weight * pm2 * am * am;
    if (want_grad) {
      const double c = 0.5 * bp * face.weight * pm2 * m;
      e.grad[face.a] += c;
      e.grad[face.b] += c;
    }
  }
  const double third = area / 3.0;
  double load = 0.0;
  for (const auto& tri : dom.triangles())
    for (int v : tri) {
      load += third * f[v] * phi[v];
      if (want_grad) e.grad[v] -= third * f[v];
    }
  e.j = (grad_sum + bp * bdry_sum) / p - load;
  return e;
}

PoissonResult solve_p_poisson(const Domain& dom, const ScalarField& f, const RobinParams& rp,
                              const PoissonOptions& opts, const std::optional<ScalarField>& start) {
  require_on(dom, f);
  if (!rp.finite()) throw std::invalid_argument("solve_p_poisson needs finite p");
  if (f.min() < 0.0) throw std::invalid_argument("f must be nonnegative");
  const auto mass = lumped_mass(dom);
  const double tol = opts.tol * (1.0 + f.sup_abs());

  std::vector<double> stages;
  if (opts.continuation && !start && rp.p != 2.0) {
    double q = 2.0;
    stages.push_back(q);
    if (rp.p > 2.0) {
      while (q * opts.continuation_factor < rp.p) {
        q *= opts.continuation_factor;
        stages.push_back(q);
      }
    }
  }
  stages.push_back(rp.p);

  std::vector<double> w = start ? start->vec() : std::vector<double>(dom.num_vertices(), 0.0);
  if (start) require_on(dom, *start);
  PoissonResult res;
  res.p = rp.p;
  Stage st;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const bool last = s + 1 == stages.size();
    const RobinParams sp(rp.beta, stages[s]);
    const double stol = last ? tol : std::max(tol, opts.stage_tol * (1.0 + f.sup_abs()));
    st = opts.method == PoissonMethod::Newton ? newton_stage(dom, f.values(), sp, w, stol, opts.max_iter, mass)
                                              : cg_stage(dom, f.values(), sp, w, stol, opts.max_iter, mass);
    res.iterations += st.iterations;
  }
  res.v = ScalarField(std::move(w));
  res.j_value = poisson_energy(dom, f.values(), res.v.values(), rp, false).j;
  res.residual_norm = st.residual;
  res.converged = st.converged;
  if (!res.converged) throw NotConverged<PoissonResult>("p-Poisson solver did not converge", res);
  return res;
}

double radial_oracle_ball(int n, double p, double beta, double r) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
  if (p == kInfinity) return -r + 1.0 / beta + 1.0;
  const double alpha = 1.0 / (p - 1.0);
  const double na = std::pow(static_cast<double>(n), alpha);
  return -(p - 1.0) / (na * p) * std::pow(r, p / (p - 1.0)) + std::pow(1.0 / (n * std::pow(beta, p)), alpha) +
         (p - 1.0) / (na * p);
}

double radial_oracle_annular(int n, double p, double beta, double eps, double r) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
  if (p == kInfinity) return 1.0 / beta + (1.0 - r);
  if (!(p > n) || !(p > 1.0)) throw std::invalid_argument("the closed form needs p > n");
  const double alpha = 1.0 / (p - 1.0);
  const double na = std::pow(static_cast<double>(n), alpha);
  const double ena = std::pow(eps, n * alpha);
  const double tail = ena / std::pow(n * std::pow(beta, p), alpha);
  const double ex = (p - n) / (p - 1.0);
  if (r <= eps) {
    const double q = p / (p - 1.0);
    return (p - 1.0) / (na * p) * (std::pow(eps, q) - std::pow(r, q)) +
           ena * (p - 1.0) / (na * (p - n)) * (1.0 - std::pow(eps, ex)) + tail;
  }
  return ena * (p - 1.0) / (na * (p - n)) * (1.0 - std::pow(r, ex)) + tail;
}

ScalarField limit_maximal_solution(const Domain& dom, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  std::vector<double> v = distance_field(dom).d.vec();
  for (double& x : v) x += 1.0 / beta;
  return ScalarField(std::move(v));
}

double j_infinity(const Domain& dom, const ScalarField& f, const ScalarField& phi) {
  require_on(dom, f);
  require_on(dom, phi);
  const auto mass = lumped_mass(dom);
  double s = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) s += mass[i] * f[i] * phi[i];
  return -s;
}

std::vector<int> cell_neighbours(const Domain& dom, int v) {
  const auto [ix, iy] = dom.lattice(v);
  std::vector<int> out;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int u = dom.vertex_at(ix + dx, iy + dy);
      if (u < 0) continue;
      // Some inside cell must contain both vertices.
      bool shared = false;
      for (int cy = iy - 1; cy <= iy && !shared; ++cy)
        for (int cx = ix - 1; cx <= ix && !shared; ++cx) {
          if (!dom.cell_inside(cx, cy)) continue;
          const int ux = ix + dx, uy = iy + dy;
          shared = ux >= cx && ux <= cx + 1 && uy >= cy && uy <= cy + 1;
        }
      if (shared) out.push_back(u);
    }
  return out;
}

ScalarField amle_extend(const Domain& dom, const std::vector<std::uint8_t>& fixed, const ScalarField& values,
                        const AmleOptions& opts) {
  require_on(dom, values);
  const int n = static_cast<int>(dom.num_vertices());
  if (fixed.size() != static_cast<std::size_t>(n)) throw DomainMismatch("fixed mask does not match the domain");
  if (std::find(fixed.begin(), fixed.end(), 1) == fixed.end()) throw std::invalid_argument("no fixed vertex");

  std::vector<std::vector<int>> nb(n);
  for (int v = 0; v < n; ++v)
    if (!fixed[v]) nb[v] = cell_neighbours(dom, v);

  // Every free vertex must reach a fixed one.
  std::vector<std::uint8_t> reached(fixed);
  std::vector<int> queue;
  for (int v = 0; v < n; ++v)
    if (fixed[v]) queue.push_back(v);
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const int v = queue[k];
    for (int u : cell_neighbours(dom, v))
      if (!reached[u]) {
        reached[u] = 1;
        queue.push_back(u);
      }
  }
  if (std::find(reached.begin(), reached.end(), 0) != reached.end())
    throw DisconnectedComponent("a free component has no fixed vertex");

  std::vector<int> order = opts.order;
  if (order.empty()) {
    for (int v = 0; v < n; ++v)
      if (!fixed[v]) order.push_back(v);
  }
  std::vector<double> u = values.vec();
  // Start free vertices from the mean of fixed data to keep iterates in range.
  double lo = kInfinity, hi = -kInfinity;
  for (int v = 0; v < n; ++v)
    if (fixed[v]) lo = std::min(lo, u[v]), hi = std::max(hi, u[v]);
  for (int v : order) u[v] = std::clamp(u[v], lo, hi);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int v : order) {
      double mx = -kInfinity, mn = kInfinity;
      for (int w : nb[v]) {
        mx = std::max(mx, u[w]);
        mn = std::min(mn, u[w]);
      }
      const double nv = 0.5 * (mx + mn);
      change = std::max(change, std::abs(nv - u[v]));
      u[v] = nv;
    }
    if (change <= opts.tol) return ScalarField(std::move(u));
  }
  throw std::runtime_error("AMLE iteration did not settle");
}

double feasibility_violation(const Domain& dom, const ScalarField& phi, double beta) {
  require_on(dom, phi);
  const auto vbar = limit_maximal_solution(dom, beta);
  const double h = dom.h();
  double worst = -kInfinity;
  for (std::size_t v = 0; v < phi.size(); ++v) {
    worst = std::max(worst, phi[v] - vbar[v]);
    const auto [ix, iy] = dom.lattice(static_cast<int>(v));
    for (int u : cell_neighbours(dom, static_cast<int>(v))) {
      const auto [jx, jy] = dom.lattice(u);
      const double len = h * std::hypot(jx - ix, jy - iy);
      worst = std::max(worst, std::abs(phi[v] - phi[u]) - len);
    }
  }
  for (int v : dom.boundary_vertices()) worst = std::max(worst, std::abs(phi[v]) - 1.0 / beta);
  return worst;
}

UniquenessReport uniqueness_certificate(const Domain& dom, const ScalarField& f, double beta,
                                        const AmleOptions& amle) {
  require_on(dom, f);
  if (f.min() < 0.0) throw std::invalid_argument("f must be nonnegative");
  if (f.max() <= 0.0) throw std::invalid_argument("f vanishes identically");
  const int n = static_cast<int>(dom.num_vertices());
  const auto dist = distance_field(dom);
  UniquenessReport rep;
  rep.ridge = ridge_set(dom, dist);

  rep.in_support.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    if (!(f[v] > 0.0)) continue;
    rep.in_support[v] = 1;
    for (int u : cell_neighbours(dom, v)) rep.in_support[u] = 1;
  }
  for (int v = 0; v < n; ++v)
    if (rep.in_support[v]) rep.support.push_back(v);
  for (int v : rep.ridge.members)
    if (!rep.in_support[v]) rep.uncovered.push_back(v);
  rep.included = rep.uncovered.empty();
  if (rep.included) return rep;

  const ScalarField vbar = limit_maximal_solution(dom, beta);
  std::vector<std::uint8_t> is_bdry(n, 0);
  for (int v : dom.boundary_vertices()) is_bdry[v] = 1;

  // Components of the complement of the support, in order of their first uncovered ridge vertex.
  std::vector<int> comp(n, -1);
  std::string last_reason;
  for (int seed : rep.uncovered) {
    if (comp[seed] >= 0) continue;
    std::vector<int> region{seed};
    comp[seed] = seed;
    for (std::size_t k = 0; k < region.size(); ++k)
      for (int u : cell_neighbours(dom, region[k]))
        if (!rep.in_support[u] && comp[u] < 0) {
          comp[u] = seed;
          region.push_back(u);
        }
    std::vector<std::uint8_t> fixed(n, 1);
    bool any_free = false;
    for (int v : region)
      if (!is_bdry[v]) fixed[v] = 0, any_free = true;
    if (!any_free) continue;
    AmleOptions ao = amle;
    ao.order.clear();
    const ScalarField w = amle_extend(dom, fixed, vbar, ao);
    double diff = 0.0;
    for (int v = 0; v < n; ++v) diff = std::max(diff, std::abs(w[v] - vbar[v]));
    const double viol = feasibility_violation(dom, w, beta);
    if (viol > 2.0 * dom.h()) {
      last_reason = "witness breaks feasibility by " + std::to_string(viol);
      continue;
    }
    if (!(diff > 10.0 * dom.h())) {
      last_reason = "witness differs by only " + std::to_string(diff);
      continue;
    }
    rep.witness = w;
    for (int v = 0; v < n; ++v)
      if (!fixed[v]) rep.witness_region.push_back(v);
    rep.witness_max_difference = diff;
    rep.witness_violation = viol;
    rep.witness_objective_gap = std::abs(j_infinity(dom, f, w) - j_infinity(dom, f, vbar));
    return rep;
  }
  throw WitnessConstructionFailed(last_reason.empty() ? "no component admits a witness" : last_reason);
}

double upper_envelope_check(const ScalarField& v, const Domain& dom, double beta) {
  require_on(dom, v);
  const auto vbar = limit_maximal_solution(dom, beta);
  double worst = -kInfinity;
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, v[i] - vbar[i]);
  return worst;
}

}  // namespace robin
