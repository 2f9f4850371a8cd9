#include "robin/eigenproblem.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "assembly.hpp"
#include "robin/distance.hpp"

namespace robin {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double weighted_dot(std::span<const double> a, std::span<const double> b, std::span<const double> wt) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * wt[i];
  return s;
}

// |w| scaled to unit L^p norm.
void normalize_abs(const Domain& dom, std::vector<double>& w, double p) {
  for (double& x : w) x = std::abs(x);
  const double n = volume_power(dom, w, p).root();
  if (n == 0.0) throw ZeroField("eigen iterate vanished");
  for (double& x : w) x /= n;
}

double scale_free_norm(std::span<const double> g, std::span<const double> x, std::span<const double> mass) {
  double gm = 0.0;
  double xm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gm += g[i] * g[i] / mass[i];
    xm += x[i] * x[i] * mass[i];
  }
  return std::sqrt(gm * xm);
}

EigenResult make_result(const Domain& dom, const RobinParams& rp, std::vector<double> x, int iters, double gn,
                        bool converged) {
  EigenResult r;
  r.p = rp.p;
  r.u = ScalarField(std::move(x));
  r.log_lambda = log_rayleigh_quotient(dom, r.u, rp);
  r.lambda_p = std::exp(r.log_lambda);
  r.lambda_root = std::exp(r.log_lambda / rp.p);
  r.iterations = iters;
  r.grad_norm = gn;
  r.converged = converged;
  return r;
}

}  // namespace

QuotientGradient log_quotient_gradient(const Domain& dom, std::span<const double> w, const RobinParams& rp) {
  if (w.size() != dom.num_vertices()) throw DomainMismatch("field does not match the domain");
  if (!rp.finite()) throw std::invalid_argument("eigen quotient needs finite p");
  const double p = rp.p;
  const std::size_t nt = dom.num_triangles();
  const auto& faces = dom.faces();
  const auto& tris = dom.triangles();

  std::vector<Point> g(nt);
  std::vector<double> gn(nt), centroid(nt), areas(nt, dom.triangle_area());
  for (std::size_t t = 0; t < nt; ++t) {
    g[t] = detail::triangle_gradient(dom, t, w);
    gn[t] = norm(g[t]);
    centroid[t] = (w[tris[t][0]] + w[tris[t][1]] + w[tris[t][2]]) / 3.0;
  }
  const auto mid = face_midpoint_values(dom, w);
  const auto fw = face_weights(dom);

  std::vector<double> dG(nt), dB(faces.size()), dV(nt);
  const PowerSum G = power_sum(gn, areas, p, dG);
  const PowerSum B = power_sum(mid, fw, p, dB);
  const PowerSum V = power_sum(centroid, areas, p, dV);
  if (V.zero()) throw ZeroField("Rayleigh quotient of a field with zero L^p norm");

  const double lG = G.log();
  const double lB = B.zero() ? -kInfinity : p * std::log(rp.beta) + B.log();
  const double lE = log_add(lG, lB);
  const double wG = lG == -kInfinity ? 0.0 : std::exp(lG - lE);
  const double wB = lB == -kInfinity ? 0.0 : std::exp(lB - lE);

  QuotientGradient out;
  out.log_q = lE - V.log();
  out.grad.assign(w.size(), 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    if (gn[t] > 0.0) detail::scatter_gradient(dom, t, (wG * dG[t] / gn[t]) * g[t], out.grad);
    const double c = dV[t] * (centroid[t] < 0.0 ? -1.0 : 1.0) / 3.0;
    for (int v : tris[t]) out.grad[v] -= c;
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double c = 0.5 * wB * dB[f] * (mid[f] < 0.0 ? -1.0 : 1.0);
    out.grad[faces[f].a] += c;
    out.grad[faces[f].b] += c;
  }
  return out;
}

EigenResult solve_eigen(const Domain& dom, const RobinParams& rp, const EigenOptions& opts,
                        const std::optional<ScalarField>& start) {
  if (!rp.finite()) throw std::invalid_argument("solve_eigen needs finite p");
  const double p = rp.p;
  std::vector<double> x;
  if (start) {
    require_on(dom, *start);
    x = start->vec();
  } else {
    x = distance_field(dom).d.vec();
    for (double& v : x) v += 1.0 / rp.beta;
  }
  normalize_abs(dom, x, p);
  const auto mass = lumped_mass(dom);
  const std::size_t n = x.size();

  auto eval = log_quotient_gradient(dom, x, rp);
  double F = eval.log_q;
  std::vector<double> g = std::move(eval.grad);

  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> d(n), xn(n), alpha_buf;
  double gn = scale_free_norm(g, x, mass);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (gn <= opts.tol) return make_result(dom, rp, std::move(x), it, gn, true);

    // Two-loop recursion with a lumped-mass preconditioned initial matrix.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    alpha_buf.assign(S.size(), 0.0);
    for (std::size_t k = S.size(); k-- > 0;) {
      alpha_buf[k] = rho[k] * dot(S[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha_buf[k] * Y[k][i];
    }
    double gamma;
    if (!S.empty()) {
      const auto& ys = Y.back();
      double yMy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yMy += ys[i] * ys[i] / mass[i];
      gamma = 1.0 / (rho.back() * yMy);
    } else {
      // First step moves about 1% of the iterate in the mass norm.
      double gm = 0.0;
      for (std::size_t i = 0; i < n; ++i) gm += g[i] * g[i] / mass[i];
      gamma = 0.01 * std::sqrt(weighted_dot(x, x, mass)) / std::sqrt(gm);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] *= gamma / mass[i];
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta_k = rho[k] * dot(Y[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha_buf[k] - beta_k) * S[k][i];
    }
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      double gm = 0.0;
      for (std::size_t i = 0; i < n; ++i) gm += g[i] * g[i] / mass[i];
      const double gam = 0.01 * std::sqrt(weighted_dot(x, x, mass)) / std::sqrt(gm);
      for (std::size_t i = 0; i < n; ++i) d[i] = -gam * g[i] / mass[i];
      slope = dot(g, d);
    }

    // Armijo backtracking on the quotient of the normalized |x + a d|. Once
    // decreases fall below rounding in F, accept steps whose directional
    // derivative has not overshot.
    const double noise = 1e-13 * (1.0 + std::abs(F));
    double a = 1.0;
    bool accepted = false;
    QuotientGradient trial;
    for (int bt = 0; bt < 60; ++bt, a *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + a * d[i];
      try {
        normalize_abs(dom, xn, p);
      } catch (const ZeroField&) {
        continue;
      }
      trial = log_quotient_gradient(dom, xn, rp);
      if (!std::isfinite(trial.log_q)) continue;
      if (trial.log_q <= F + 1e-4 * a * slope) {
        accepted = true;
        break;
      }
      if (trial.log_q <= F + noise && dot(trial.grad, d) <= 0.8 * std::abs(slope)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      throw LineSearchStall<EigenResult>("eigen line search stalled",
                                         make_result(dom, rp, std::move(x), it, gn, false));
    }
    if (opts.check_monotone && trial.log_q > F + noise)
      throw std::logic_error("quotient increased on an accepted step");

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = trial.grad[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-14 * std::sqrt(dot(s, s) * dot(y, y)) && opts.memory > 0) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x.swap(xn);
    F = trial.log_q;
    g = std::move(trial.grad);
    gn = scale_free_norm(g, x, mass);
  }
  if (gn <= opts.tol) return make_result(dom, rp, std::move(x), it, gn, true);
  throw NotConverged<EigenResult>("eigen solver reached max_iter", make_result(dom, rp, std::move(x), it, gn, false));
}

SweepTable eigen_sweep(const Domain& dom, double beta, const std::vector<double>& p_list, const EigenOptions& opts) {
  for (std::size_t i = 0; i < p_list.size(); ++i) {
    if (!(p_list[i] > 1.0) || !std::isfinite(p_list[i])) throw std::invalid_argument("sweep exponents must be finite and > 1");
    if (i > 0 && !(p_list[i] > p_list[i - 1])) throw std::invalid_argument("sweep exponents must increase");
  }
  SweepTable table;
  table.beta = beta;
  table.lambda_inf_geometric = lambda_infinity(dom, beta);
  std::optional<ScalarField> warm;
  for (double p : p_list) {
    const RobinParams rp(beta, p);
    SweepRow row;
    row.p = p;
    EigenResult res;
    try {
      res = solve_eigen(dom, rp, opts, warm);
    } catch (const NotConverged<EigenResult>& e) {
      res = e.partial();
      row.note = e.what();
    }
    row.lambda_p = res.lambda_p;
    row.lambda_root = res.lambda_root;
    row.gap = res.lambda_root - table.lambda_inf_geometric;
    row.iterations = res.iterations;
    row.converged = res.converged;
    table.rows.push_back(row);
    warm = res.u;
    table.last = std::move(res);
  }
  return table;
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "p,lambda_p,lambda_root,gap,iters,converged\n";
  out.precision(17);
  for (const auto& r : table.rows)
    out << r.p << ',' << r.lambda_p << ',' << r.lambda_root << ',' << r.gap << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << '\n';
}

LimitCheck eigenfunction_limit_check(const ScalarField& u, double lambda_root, const Domain& dom, double beta) {
  require_on(dom, u);
  if (!(lambda_root > 0.0)) throw std::invalid_argument("lambda_root must be positive");
  const double m = u.max();
  if (!(m > 0.0)) throw ZeroField("eigenfunction has no positive value");
  LimitCheck c;
  c.scale = 1.0 / (lambda_root * m);
  const auto dist = distance_field(dom);
  c.violation = -kInfinity;
  for (std::size_t v = 0; v < u.size(); ++v)
    c.violation = std::max(c.violation, c.scale * u[v] - (1.0 / beta + dist.d[v]));
  return c;
}

LimitCheck eigenfunction_limit_check(const EigenResult& res, const Domain& dom, double beta) {
  return eigenfunction_limit_check(res.u, res.lambda_root, dom, beta);
}

}  // namespace robin
