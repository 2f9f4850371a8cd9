#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "robin/distance.hpp"
#include "robin/eigenproblem.hpp"
#include "robin/fields.hpp"
#include "robin/poisson.hpp"
#include "robin/runner.hpp"
#include "robin/viscosity.hpp"

namespace robin {

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Check = std::function<Verdict(std::mt19937_64&)>;

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

ScalarField limit_candidate(const Domain& dom, double beta) {
  auto d = distance_field(dom).d;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += 1.0 / beta;
  return d;
}

Verdict distance_exact(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(3, 65);
  int worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = size(rng), ny = size(rng);
    const GridMask m = oracle::random_noise_mask(rng, nx, ny, 0.7);
    Domain dom;
    try {
      dom = build_grid_domain(m, 1.0);
    } catch (const EmptyDomain&) {
      continue;
    }
    const auto got = distance_field(dom).dist2;
    const auto want = oracle::brute_force_dist2(dom);
    for (std::size_t i = 0; i < got.size(); ++i) worst += got[i] != want[i];
  }
  return {worst == 0, fmt::format("{} mismatching vertices over 20 random masks", worst)};
}

Verdict faber_krahn_infinity(std::mt19937_64& rng) {
  const double h = 1.0 / 32;
  double margin = kInfinity;
  for (int trial = 0; trial < 20; ++trial) {
    const Domain dom = build_grid_domain(oracle::random_blob_mask(rng, 65), h);
    const double lam_disk = lambda_infinity_from_inradius(std::sqrt(dom.area() / M_PI), 1.0);
    margin = std::min(margin, lambda_infinity(dom, 1.0) - (lam_disk - h));
  }
  return {margin >= 0.0, fmt::format("min of lambda - (lambda_disk - h) over 20 blobs: {:.4g}", margin)};
}

Verdict affine_gradient(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Domain dom = build_grid_domain(oracle::random_blob_mask(rng, 33), 1.0 / 32);
    const auto c = uniform(rng, 3, -2.0, 2.0);
    const auto g = gradient(dom, sample(dom, [&](Point x) { return c[0] + c[1] * x.x + c[2] * x.y; }));
    for (const Point& p : g) worst = std::max({worst, std::abs(p.x - c[1]), std::abs(p.y - c[2])});
  }
  return {worst <= 1e-10, fmt::format("max gradient error {:.3g}", worst)};
}

Verdict p_norm(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const auto s = uniform(rng, n, -10.0, 10.0);
    const auto w = uniform(rng, n, 0.01, 2.0);
    const double p = uniform(rng, 1, 1.0, 30.0)[0];
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * std::pow(static_cast<long double>(std::abs(s[i])), p);
    const double naive = static_cast<double>(std::pow(sum, 1.0L / p));
    worst = std::max(worst, std::abs(stabilized_p_norm(s, w, p) - naive) / naive);
  }
  const std::vector<double> big(8, 1e300), ones(8, 1.0);
  const double huge = stabilized_p_norm(big, ones, 1000.0);
  const bool finite = std::isfinite(huge) && std::abs(huge / 1e300 - std::pow(8.0, 1e-3)) <= 1e-12;
  return {worst <= 1e-12 && finite, fmt::format("max relative error {:.3g}; large samples {}", worst,
                                                finite ? "finite" : "overflow")};
}

Verdict quotient_scale(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarField w(uniform(rng, dom.num_vertices(), 0.1, 2.0));
    const double c = std::exp(uniform(rng, 1, -20.0, 20.0)[0]);
    for (double p : {2.0, 7.0, 40.0}) {
      const RobinParams rp(1.0, p);
      const double a = log_rayleigh_quotient(dom, w, rp);
      worst = std::max(worst, std::abs(log_rayleigh_quotient(dom, c * w, rp) - a) / (1 + std::abs(a)));
    }
  }
  return {worst <= 1e-10, fmt::format("max change of log quotient under scaling {:.3g}", worst)};
}

template <typename F>
double directional_error(std::mt19937_64& rng, std::size_t n, const std::vector<double>& w, F&& value,
                         const std::vector<double>& grad) {
  const auto v = uniform(rng, n, -1.0, 1.0);
  double analytic = 0.0, size = 0.0;
  for (std::size_t i = 0; i < n; ++i) analytic += grad[i] * v[i], size += std::abs(grad[i] * v[i]);
  const double eps = 1e-6;
  std::vector<double> wp(w), wm(w);
  for (std::size_t i = 0; i < n; ++i) wp[i] += eps * v[i], wm[i] -= eps * v[i];
  return std::abs((value(wp) - value(wm)) / (2 * eps) - analytic) / size;
}

Verdict eigen_gradient(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  double worst = 0.0;
  for (double p : {2.0, 3.0, 6.0}) {
    const RobinParams rp(1.0, p);
    for (int trial = 0; trial < 5; ++trial) {
      const auto w = uniform(rng, dom.num_vertices(), 0.2, 1.5);
      const auto qg = log_quotient_gradient(dom, w, rp);
      worst = std::max(worst, directional_error(
                                  rng, w.size(), w,
                                  [&](const std::vector<double>& x) { return log_quotient_gradient(dom, x, rp).log_q; },
                                  qg.grad));
    }
  }
  return {worst <= 1e-6, fmt::format("max relative directional error {:.3g}", worst)};
}

Verdict eigen_below_candidate(std::mt19937_64& rng) {
  const double h = 1.0 / 16;
  double margin = kInfinity;
  for (const Domain& dom : {build(disk_shape(1.0, h)), build(l_shape(0.5, h)),
                            build_grid_domain(oracle::random_blob_mask(rng, 24), 1.0 / 24)}) {
    for (double p : {2.0, 5.0, 12.0}) {
      const RobinParams rp(1.0, p);
      const double got = solve_eigen(dom, rp).lambda_root;
      margin = std::min(margin, rayleigh_root(dom, limit_candidate(dom, 1.0), rp) + 1e-12 - got);
    }
  }
  return {margin >= 0.0, fmt::format("min of candidate root - eigen root: {:.4g}", margin)};
}

Verdict poisson_gradient(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  double worst = 0.0;
  for (double p : {2.0, 3.0, 6.0}) {
    const RobinParams rp(1.3, p);
    for (int trial = 0; trial < 5; ++trial) {
      const auto w = uniform(rng, dom.num_vertices(), -1.0, 1.5);
      const auto f = uniform(rng, dom.num_vertices(), 0.0, 2.0);
      const auto e = poisson_energy(dom, f, w, rp);
      worst = std::max(worst, directional_error(
                                  rng, w.size(), w,
                                  [&](const std::vector<double>& x) { return poisson_energy(dom, f, x, rp, false).j; },
                                  e.grad));
    }
  }
  return {worst <= 1e-6, fmt::format("max relative directional error {:.3g}", worst)};
}

Verdict poisson_convexity(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  const ScalarField f(dom.num_vertices(), 1.0);
  double worst = 0.0;
  for (double p : {2.0, 4.0}) {
    const RobinParams rp(1.0, p);
    const auto a = solve_p_poisson(dom, f, rp, {}, ScalarField(uniform(rng, dom.num_vertices(), -2.0, 3.0)));
    const auto b = solve_p_poisson(dom, f, rp, {}, ScalarField(uniform(rng, dom.num_vertices(), -2.0, 3.0)));
    worst = std::max(worst, (a.v - b.v).sup_abs());
  }
  return {worst <= 1e-6, fmt::format("max difference between random starts {:.3g}", worst)};
}

Verdict poisson_weak_form(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  const auto c = uniform(rng, 2, 0.5, 1.5);
  const auto f = sample(dom, [&](Point x) { return c[0] + c[1] * x.x * x.x; });
  const RobinParams rp(1.0, 6.0);
  const auto r = solve_p_poisson(dom, f, rp);
  const auto e = poisson_energy(dom, f.values(), r.v.values(), rp);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto phi = uniform(rng, e.grad.size(), -1.0, 1.0);
    double pairing = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) pairing += e.grad[i] * phi[i];
    worst = std::max(worst, std::abs(pairing) / f.sup_abs());
  }
  return {worst <= 1e-6, fmt::format("max relative pairing with 20 random test fields {:.3g}", worst)};
}

Verdict poisson_envelope(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  const double beta = uniform(rng, 1, 0.5, 2.0)[0];
  const auto r = solve_p_poisson(dom, ScalarField(dom.num_vertices(), 1.0), RobinParams(beta, 24.0));
  const double env = upper_envelope_check(r.v, dom, beta);
  return {env <= 0.05, fmt::format("envelope violation {:.4g} at p = 24, beta = {:.4f}", env, beta)};
}

Verdict amle_order(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  std::vector<std::uint8_t> fixed(dom.num_vertices(), 0);
  std::vector<double> values(dom.num_vertices(), 0.0);
  const auto c = uniform(rng, 2, -1.0, 1.0);
  for (int v : dom.boundary_vertices()) {
    fixed[v] = 1;
    const Point x = dom.position(v);
    values[v] = x.y > 0 ? c[0] * x.x : c[1] * x.y;
  }
  AmleOptions a;
  a.tol = 1e-14;
  const auto base = amle_extend(dom, fixed, ScalarField(values), a);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    AmleOptions b = a;
    for (int v = 0; v < static_cast<int>(fixed.size()); ++v)
      if (!fixed[v]) b.order.push_back(v);
    std::shuffle(b.order.begin(), b.order.end(), rng);
    worst = std::max(worst, (amle_extend(dom, fixed, ScalarField(values), b) - base).sup_abs());
  }
  return {worst <= 1e-10, fmt::format("max difference over 3 shuffled orders {:.3g}", worst)};
}

Verdict j_infinity_optimal(std::mt19937_64& rng) {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  const auto vbar = limit_maximal_solution(dom, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_violation = 0.0, worst_gain = -kInfinity;
  for (int k = 0; k < 50; ++k) {
    const double c = 0.3 + 0.7 * unit(rng);
    const Point x0{2 * unit(rng) - 1, 2 * unit(rng) - 1};
    const double a = unit(rng);
    const auto phi = sample(dom, [&](Point x) { return std::min(c, a + norm(x - x0)); });
    ScalarField ph(vbar.size());
    for (std::size_t v = 0; v < ph.size(); ++v) ph[v] = std::min(c * vbar[v], phi[v]);
    std::vector<double> fv(vbar.size());
    for (auto& x : fv) x = unit(rng) < 0.3 ? 0.0 : unit(rng);
    const ScalarField f(fv);
    worst_violation = std::max(worst_violation, feasibility_violation(dom, ph, 1.0));
    worst_gain = std::max(worst_gain, j_infinity(dom, f, vbar) - j_infinity(dom, f, ph));
  }
  return {worst_violation <= 1e-12 && worst_gain <= 1e-14,
          fmt::format("50 feasible competitors: max violation {:.3g}, max J gain of the limit field {:.3g}",
                      worst_violation, worst_gain)};
}

Verdict laplacian_affine(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Domain dom = build_grid_domain(oracle::random_blob_mask(rng, 33), 1.0 / 32);
    const auto c = uniform(rng, 3, -2.0, 2.0);
    const auto lap = infinity_laplacian(dom, sample(dom, [&](Point x) { return c[0] + c[1] * x.x + c[2] * x.y; }));
    worst = std::max(worst, lap.value.sup_abs());
  }
  return {worst <= 1e-8, fmt::format("max |infinity-laplacian| of affine fields {:.3g}", worst)};
}

Verdict analytic_residual(std::mt19937_64& rng) {
  const double h = 1.0 / 32;
  const double beta = uniform(rng, 1, 1.0, 2.0)[0];
  const Domain disk = build(disk_shape(1.0, h));
  const auto u = sample(disk, [beta](Point x) { return 1.0 / beta + 1.0 - norm(x); });
  const auto r = limit_pde_residual(disk, u, beta / (1 + beta), beta);
  const bool ok = r.interior.q95 <= 5 * h && r.boundary.q95 <= 5 * h;
  return {ok, fmt::format("disk, beta = {:.4f}: interior q95 {:.4g}, boundary q95 {:.4g}, bound {:.4g}", beta,
                          r.interior.q95, r.boundary.q95, 5 * h)};
}

Verdict csv_round_trip(std::mt19937_64& rng) {
  const Domain dom = build_grid_domain(oracle::random_blob_mask(rng, 33), 1.0 / 32);
  std::normal_distribution<double> n01;
  std::vector<double> v(dom.num_vertices());
  for (auto& x : v) x = n01(rng) * std::exp(10 * n01(rng));
  const ScalarField w(v);
  const auto path = std::filesystem::temp_directory_path() / fmt::format("robin_check_{}.csv", std::random_device{}());
  write_field_csv(path.string(), dom, w);
  const auto back = read_field_csv(path.string(), dom);
  std::filesystem::remove(path);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < v.size(); ++i) diff += back[i] != w[i];
  return {diff == 0, fmt::format("{} of {} values changed", diff, v.size())};
}

}  // namespace

std::vector<CheckResult> check_suite(std::uint64_t seed, int threads) {
  const std::vector<std::pair<std::string, Check>> checks = {
      {"distance_exact", distance_exact},
      {"faber_krahn_infinity", faber_krahn_infinity},
      {"affine_gradient", affine_gradient},
      {"p_norm", p_norm},
      {"quotient_scale_invariance", quotient_scale},
      {"eigen_gradient", eigen_gradient},
      {"eigen_below_candidate", eigen_below_candidate},
      {"poisson_gradient", poisson_gradient},
      {"poisson_convexity", poisson_convexity},
      {"poisson_weak_form", poisson_weak_form},
      {"poisson_envelope", poisson_envelope},
      {"amle_order_invariance", amle_order},
      {"j_infinity_optimal", j_infinity_optimal},
      {"infinity_laplacian_affine", laplacian_affine},
      {"limit_residual_analytic", analytic_residual},
      {"csv_round_trip", csv_round_trip},
  };
  std::vector<CheckResult> out(checks.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < checks.size(); i = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(i)};
      std::mt19937_64 rng(seq);
      const auto t0 = std::chrono::steady_clock::now();
      out[i].name = checks[i].first;
      try {
        const auto v = checks[i].second(rng);
        out[i].pass = v.pass;
        out[i].detail = v.detail;
      } catch (const std::exception& e) {
        out[i].pass = false;
        out[i].detail = std::string("threw: ") + e.what();
      }
      out[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(checks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace robin
