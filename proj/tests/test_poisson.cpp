#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robin/distance.hpp"
#include "robin/poisson.hpp"

using namespace robin;

namespace {

double radius(const Domain& dom, int v) { return std::min(1.0, norm(dom.position(v))); }

double rel_sup_error(const Domain& dom, const ScalarField& v, const std::function<double(double)>& oracle) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double o = oracle(radius(dom, static_cast<int>(i)));
    err = std::max(err, std::abs(v[i] - o));
    ref = std::max(ref, std::abs(o));
  }
  return err / ref;
}

ScalarField ones(const Domain& dom) { return ScalarField(dom.num_vertices(), 1.0); }

}  // namespace

TEST_CASE("J_p gradient matches central differences") {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> val(-1.0, 1.5), pos(0.0, 2.0);
  for (double p : {2.0, 3.0, 6.0}) {
    const RobinParams rp(1.3, p);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> w(dom.num_vertices()), v(dom.num_vertices()), f(dom.num_vertices());
      for (auto& x : w) x = val(rng);
      for (auto& x : v) x = val(rng);
      for (auto& x : f) x = pos(rng);
      const auto e = poisson_energy(dom, f, w, rp);
      double analytic = 0.0, size = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        analytic += e.grad[i] * v[i];
        size += std::abs(e.grad[i] * v[i]);
      }
      const double eps = 1e-6;
      std::vector<double> wp(w), wm(w);
      for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] += eps * v[i];
        wm[i] -= eps * v[i];
      }
      const double fd = (poisson_energy(dom, f, wp, rp, false).j - poisson_energy(dom, f, wm, rp, false).j) / (2 * eps);
      CHECK(std::abs(fd - analytic) <= 1e-6 * size);
    }
  }
}

TEST_CASE("zero source gives the zero solution") {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  for (double p : {2.0, 5.0}) {
    const auto r = solve_p_poisson(dom, ScalarField(dom.num_vertices(), 0.0), RobinParams(1.0, p));
    CHECK(r.v.sup_abs() == 0.0);
    CHECK(r.j_value == 0.0);
  }
  CHECK_THROWS_AS(solve_p_poisson(dom, ScalarField(dom.num_vertices(), -1.0), RobinParams(1.0, 2.0)),
                  std::invalid_argument);
}

TEST_CASE("radial_oracle_ball examples") {
  CHECK(radial_oracle_ball(2, 2.0, 1.0, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(radial_oracle_ball(2, 2.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(radial_oracle_ball(2, kInfinity, 2.0, 0.3) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK_THROWS_AS(radial_oracle_ball(2, 2.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(radial_oracle_ball(2, 2.0, 1.0, -0.1), std::invalid_argument);
  // Independent flux-integral oracle.
  for (double p : {1.5, 2.0, 4.0, 10.0, 32.0})
    for (double beta : {0.5, 1.0, 2.0})
      for (double r : {0.0, 0.3, 0.7, 1.0}) {
        const double ode = oracle::radial_poisson_profile(p, beta, [](double) { return 1.0; }, r);
        CHECK(radial_oracle_ball(2, p, beta, r) == doctest::Approx(ode).epsilon(1e-6));
      }
}

TEST_CASE("radial_oracle_annular examples") {
  const double below = radial_oracle_annular(2, 4.0, 1.0, 0.5, 0.5);
  const double above = radial_oracle_annular(2, 4.0, 1.0, 0.5, std::nextafter(0.5, 1.0));
  CHECK(std::abs(below - above) <= 1e-12);
  CHECK(radial_oracle_annular(2, kInfinity, 1.0, 0.5, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  for (double r : {0.0, 0.2, 0.45, 0.5, 0.55, 0.8, 1.0}) {
    const double ode = oracle::radial_poisson_profile(8.0, 1.0, [](double s) { return s < 0.5 ? 1.0 : 0.0; }, r);
    CHECK(radial_oracle_annular(2, 8.0, 1.0, 0.5, r) == doctest::Approx(ode).epsilon(1e-6));
  }
  CHECK_THROWS_AS(radial_oracle_annular(2, 2.0, 1.0, 0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(radial_oracle_annular(2, 4.0, 1.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("p-Poisson on the disk matches the radial solution") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 64));
  const auto f = ones(disk);
  const auto r2 = solve_p_poisson(disk, f, RobinParams(1.0, 2.0));
  CHECK(rel_sup_error(disk, r2.v, [](double r) { return radial_oracle_ball(2, 2.0, 1.0, r); }) <= 0.02);
  const int centre = disk.vertex_at(disk.nx() / 2, disk.ny() / 2);
  CHECK(std::abs(r2.v[centre] - 0.75) <= 0.02 * 0.75);
  const auto r10 = solve_p_poisson(disk, f, RobinParams(1.0, 10.0));
  CHECK(r10.converged);
  CHECK(rel_sup_error(disk, r10.v, [](double r) { return radial_oracle_ball(2, 10.0, 1.0, r); }) <= 0.04);
  CHECK(r10.j_value <= 0.0);
}

TEST_CASE("p-Poisson with a ball source matches the two-branch solution") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 64));
  const auto f = sample(disk, [](Point x) { return norm(x) < 0.5 ? 1.0 : 0.0; });
  const auto r = solve_p_poisson(disk, f, RobinParams(1.0, 8.0));
  CHECK(rel_sup_error(disk, r.v, [](double s) { return radial_oracle_annular(2, 8.0, 1.0, 0.5, s); }) <= 0.04);
}

TEST_CASE("strict convexity: different starts reach the same minimizer") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> val(-2.0, 3.0);
  for (double p : {2.0, 4.0}) {
    std::vector<ScalarField> sols;
    for (int k = 0; k < 2; ++k) {
      std::vector<double> s(disk.num_vertices());
      for (auto& x : s) x = val(rng);
      sols.push_back(solve_p_poisson(disk, ones(disk), RobinParams(1.0, p), {}, ScalarField(s)).v);
    }
    CHECK((sols[0] - sols[1]).sup_abs() <= 1e-6);
  }
}

TEST_CASE("weak form holds against random test fields") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  const auto f = sample(disk, [](Point x) { return 1.0 + x.x * x.x; });
  const RobinParams rp(1.0, 6.0);
  const auto r = solve_p_poisson(disk, f, rp);
  const auto e = poisson_energy(disk, f.values(), r.v.values(), rp);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    double pairing = 0.0;
    for (std::size_t i = 0; i < e.grad.size(); ++i) pairing += e.grad[i] * val(rng);
    CHECK(std::abs(pairing) <= 1e-6 * f.sup_abs());
  }
  CHECK(r.residual_norm <= 1e-10 * (1 + f.sup_abs()));
}

TEST_CASE("p-sweep approaches the maximal limit field and respects the envelope") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  const double beta = 2.0;
  const auto vbar = limit_maximal_solution(disk, beta);
  double prev = kInfinity;
  for (double p : {2.0, 4.0, 8.0, 16.0, 32.0}) {
    const auto r = solve_p_poisson(disk, ones(disk), RobinParams(beta, p));
    const double gap = (r.v - vbar).sup_abs();
    CHECK(gap <= 1.1 * prev);
    prev = gap;
    if (p >= 20) CHECK(upper_envelope_check(r.v, disk, beta) <= 0.05);
  }
  const auto r20 = solve_p_poisson(disk, ones(disk), RobinParams(1.0, 20.0));
  CHECK(upper_envelope_check(r20.v, disk, 1.0) <= 0.05);
}

TEST_CASE("conjugate gradient option agrees with Newton on a small grid") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 16));
  PoissonOptions cg;
  cg.method = PoissonMethod::ConjugateGradient;
  cg.max_iter = 200000;
  cg.tol = 1e-9;
  for (double p : {2.0, 4.0}) {
    const auto a = solve_p_poisson(disk, ones(disk), RobinParams(1.0, p));
    const auto b = solve_p_poisson(disk, ones(disk), RobinParams(1.0, p), cg);
    CHECK((a.v - b.v).sup_abs() <= 1e-6);
  }
}

TEST_CASE("limit_maximal_solution is feasible and optimal") {
  const double h = 1.0 / 32;
  const Domain disk = build(disk_shape(1.0, h));
  const auto vbar = limit_maximal_solution(disk, 1.0);
  CHECK(std::abs(vbar[disk.vertex_at(disk.nx() / 2, disk.ny() / 2)] - 2.0) <= h);
  CHECK(feasibility_violation(disk, vbar, 1.0) <= 1e-12);
  for (double m : face_midpoint_values(disk, vbar.values())) CHECK(m <= 1.0 + h);
  // At p = infinity the ball solution is the same field.
  for (std::size_t v = 0; v < vbar.size(); ++v)
    CHECK(std::abs(radial_oracle_ball(2, kInfinity, 1.0, radius(disk, static_cast<int>(v))) - vbar[v]) <= h);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double c = 0.3 + 0.7 * unit(rng);
    const Point x0{2 * unit(rng) - 1, 2 * unit(rng) - 1};
    const double a = unit(rng);
    std::vector<double> phi(vbar.size());
    for (std::size_t v = 0; v < phi.size(); ++v)
      phi[v] = std::min(c * vbar[v], a + norm(disk.position(static_cast<int>(v)) - x0));
    const ScalarField ph(phi);
    CHECK(feasibility_violation(disk, ph, 1.0) <= 1e-12);
    std::vector<double> fv(vbar.size());
    for (auto& x : fv) x = unit(rng) < 0.3 ? 0.0 : unit(rng);
    const ScalarField f(fv);
    CHECK(j_infinity(disk, f, vbar) <= j_infinity(disk, f, ph) + 1e-14);
  }
}

TEST_CASE("j_infinity examples") {
  const Domain sq = build(square_shape(1.0, 1.0 / 16));
  const auto phi = sample(sq, [](Point x) { return x.x - 2 * x.y; });
  CHECK(j_infinity(sq, ScalarField(sq.num_vertices(), 0.0), phi) == 0.0);
  CHECK(j_infinity(sq, ones(sq), ones(sq)) == doctest::Approx(-1.0).epsilon(1e-13));
  const auto f = sample(sq, [](Point x) { return 1 + x.x * x.y; });
  const auto psi = sample(sq, [](Point x) { return std::sin(3 * x.x); });
  const double lhs = j_infinity(sq, f, 2.5 * phi + (-0.7) * psi);
  const double rhs = 2.5 * j_infinity(sq, f, phi) - 0.7 * j_infinity(sq, f, psi);
  CHECK(std::abs(lhs - rhs) <= 1e-12);
}

TEST_CASE("AMLE reproduces affine data") {
  const Domain sq = build(square_shape(1.0, 1.0 / 16));
  const auto affine = sample(sq, [](Point x) { return 3 * x.x + 4 * x.y; });
  std::vector<std::uint8_t> fixed(sq.num_vertices(), 0);
  for (int v : sq.boundary_vertices()) fixed[v] = 1;
  std::vector<double> start(affine.vec());
  for (std::size_t v = 0; v < start.size(); ++v)
    if (!fixed[v]) start[v] = 0.0;
  AmleOptions opts;
  opts.tol = 1e-13;
  const auto u = amle_extend(sq, fixed, ScalarField(start), opts);
  CHECK((u - affine).sup_abs() <= 1e-8);
}

TEST_CASE("AMLE cone from a single interior value") {
  const double h = 1.0 / 16;
  const Domain disk = build(disk_shape(1.0, h));
  std::vector<std::uint8_t> fixed(disk.num_vertices(), 0);
  std::vector<double> values(disk.num_vertices(), 0.0);
  for (int v : disk.boundary_vertices()) fixed[v] = 1;
  const int centre = disk.vertex_at(disk.nx() / 2, disk.ny() / 2);
  fixed[centre] = 1;
  values[centre] = 1.0;
  const auto u = amle_extend(disk, fixed, ScalarField(values));
  CHECK(u.min() >= 0.0);
  CHECK(u.max() <= 1.0);
  // Values decrease along every radius.
  for (int v = 0; v < static_cast<int>(u.size()); ++v)
    for (int w : cell_neighbours(disk, v))
      if (norm(disk.position(w)) > norm(disk.position(v)) + 0.5 * h) CHECK(u[w] <= u[v] + 1e-9);
  // Brute-force reference: plain Jacobi midpoint iteration on the same stencil.
  std::vector<double> ref(values);
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> next(ref);
    double change = 0.0;
    for (int v = 0; v < static_cast<int>(ref.size()); ++v) {
      if (fixed[v]) continue;
      double mx = -1e300, mn = 1e300;
      for (int w : cell_neighbours(disk, v)) mx = std::max(mx, ref[w]), mn = std::min(mn, ref[w]);
      next[v] = 0.5 * (mx + mn);
      change = std::max(change, std::abs(next[v] - ref[v]));
    }
    ref.swap(next);
    if (change <= 1e-12) break;
  }
  CHECK((u - ScalarField(ref)).sup_abs() <= 1e-7);
  // Close to the continuum cone 1 - |x| away from the staircase.
  for (int v = 0; v < static_cast<int>(u.size()); ++v) {
    const double r = norm(disk.position(v));
    if (r < 0.8) CHECK(std::abs(u[v] - (1.0 - r)) <= 0.1);
  }
}

TEST_CASE("AMLE is independent of sweep order") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 16));
  std::vector<std::uint8_t> fixed(disk.num_vertices(), 0);
  std::vector<double> values(disk.num_vertices(), 0.0);
  for (int v : disk.boundary_vertices()) {
    fixed[v] = 1;
    const Point x = disk.position(v);
    values[v] = std::atan2(x.y, x.x) > 0 ? x.x : 0.5 * x.y;
  }
  AmleOptions a;
  a.tol = 1e-14;
  const auto base = amle_extend(disk, fixed, ScalarField(values), a);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 3; ++k) {
    AmleOptions b = a;
    for (int v = 0; v < static_cast<int>(fixed.size()); ++v)
      if (!fixed[v]) b.order.push_back(v);
    std::shuffle(b.order.begin(), b.order.end(), rng);
    CHECK((amle_extend(disk, fixed, ScalarField(values), b) - base).sup_abs() <= 1e-10);
  }
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  CHECK(base.min() >= lo);
  CHECK(base.max() <= hi);
}

TEST_CASE("AMLE rejects a free component without data") {
  GridMask m{7, 3, std::vector<std::uint8_t>(21, 0)};
  for (int y = 0; y < 3; ++y)
    for (int x : {0, 1, 2, 4, 5, 6}) m.inside[y * 7 + x] = 1;
  const Domain dom = build_grid_domain(m, 1.0);
  std::vector<std::uint8_t> fixed(dom.num_vertices(), 0);
  fixed[dom.vertex_at(0, 0)] = 1;
  CHECK_THROWS_AS(amle_extend(dom, fixed, ScalarField(dom.num_vertices(), 0.0)), DisconnectedComponent);
}

TEST_CASE("uniqueness certificate") {
  const double h = 1.0 / 32;
  const Domain disk = build(disk_shape(1.0, h));
  const auto ball = sample(disk, [](Point x) { return norm(x) < 0.5 ? 1.0 : 0.0; });
  const auto inc = uniqueness_certificate(disk, ball, 1.0);
  CHECK(inc.included);
  CHECK_FALSE(inc.witness);

  const auto ann = sample(disk, [](Point x) {
    const double r = norm(x);
    return r > 0.6 && r < 0.9 ? 1.0 : 0.0;
  });
  const auto rep = uniqueness_certificate(disk, ann, 1.0);
  CHECK_FALSE(rep.included);
  REQUIRE(rep.witness);
  CHECK(rep.witness_objective_gap <= 1e-8);
  CHECK(rep.witness_max_difference > 10 * h);
  CHECK(rep.witness_violation <= 2 * h);
  const auto vbar = limit_maximal_solution(disk, 1.0);
  for (int v : rep.support) CHECK((*rep.witness)[v] == vbar[v]);

  const Domain sq = build(square_shape(1.0, h));
  CHECK(uniqueness_certificate(sq, ones(sq), 1.0).included);
  CHECK_THROWS_AS(uniqueness_certificate(sq, ScalarField(sq.num_vertices(), 0.0), 1.0), std::invalid_argument);
}

TEST_CASE("upper_envelope_check examples") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  CHECK(upper_envelope_check(limit_maximal_solution(disk, 1.0), disk, 1.0) == 0.0);
  CHECK(upper_envelope_check(ScalarField(disk.num_vertices(), 0.0), disk, 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
}
