#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robin/distance.hpp"
#include "robin/eigenproblem.hpp"

using namespace robin;

namespace {

ScalarField candidate(const Domain& dom, double beta) {
  std::vector<double> v = distance_field(dom).d.vec();
  for (double& x : v) x += 1.0 / beta;
  return ScalarField(std::move(v));
}

double log_q(const Domain& dom, const std::vector<double>& w, const RobinParams& rp) {
  return log_rayleigh_quotient(dom, ScalarField(w), rp);
}

}  // namespace

TEST_CASE("log quotient gradient matches central differences") {
  const Domain dom = build(disk_shape(1.0, 1.0 / 16));
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> val(0.2, 1.5), dir(-1.0, 1.0);
  for (double p : {2.0, 3.0, 6.0}) {
    const RobinParams rp(1.0, p);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> w(dom.num_vertices()), v(dom.num_vertices());
      for (auto& x : w) x = val(rng);
      for (auto& x : v) x = dir(rng);
      const auto qg = log_quotient_gradient(dom, w, rp);
      CHECK(qg.log_q == doctest::Approx(log_q(dom, w, rp)).epsilon(1e-13));
      double analytic = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) analytic += qg.grad[i] * v[i];
      const double eps = 1e-5;
      std::vector<double> wp(w), wm(w);
      for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] += eps * v[i];
        wm[i] -= eps * v[i];
      }
      const double fd = (log_q(dom, wp, rp) - log_q(dom, wm, rp)) / (2 * eps);
      CHECK(std::abs(fd - analytic) <= 1e-6 * std::abs(analytic));
      // Euler relation of a 0-homogeneous function.
      double radial = 0.0, gsz = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        radial += qg.grad[i] * w[i];
        gsz += std::abs(qg.grad[i] * w[i]);
      }
      CHECK(std::abs(radial) <= 1e-12 * gsz);
    }
  }
}

TEST_CASE("solve_eigen invariants on the square at p = 2") {
  const Domain sq = build(square_shape(1.0, 1.0 / 16));
  const RobinParams rp(1.0, 2.0);
  const auto res = solve_eigen(sq, rp);
  CHECK(res.converged);
  CHECK(res.grad_norm <= 1e-8);
  CHECK(res.u.min() >= 0.0);
  CHECK(volume_power(sq, res.u.values(), 2.0).root() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.lambda_p == doctest::Approx(rayleigh_quotient(sq, res.u, rp)).epsilon(1e-12));
  CHECK(res.lambda_root == doctest::Approx(std::sqrt(res.lambda_p)).epsilon(1e-12));
  CHECK(res.lambda_p < rayleigh_quotient(sq, candidate(sq, 1.0), rp));
}

TEST_CASE("solve_eigen matches the radial eigenvalue of the disk") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  for (double p : {2.0, 4.0}) {
    const auto res = solve_eigen(disk, RobinParams(1.0, p));
    const double oracle = oracle::radial_eigen_root(p, 1.0);
    CHECK(std::abs(res.lambda_root - oracle) <= 0.005 * oracle);
  }
}

TEST_CASE("solve_eigen is grid consistent at p = 2") {
  const RobinParams rp(1.0, 2.0);
  const auto coarse = solve_eigen(build(disk_shape(1.0, 1.0 / 32)), rp);
  const auto fine = solve_eigen(build(disk_shape(1.0, 1.0 / 64)), rp);
  CHECK(std::abs(coarse.lambda_p - fine.lambda_p) < 0.02 * fine.lambda_p);
}

TEST_CASE("solve_eigen is invariant under scaling of the start") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 16));
  const RobinParams rp(1.5, 3.0);
  const ScalarField start = candidate(disk, 1.5);
  const auto a = solve_eigen(disk, rp, {}, start);
  const auto b = solve_eigen(disk, rp, {}, 1e3 * start);
  CHECK(std::abs(a.lambda_p - b.lambda_p) <= 1e-10 * a.lambda_p);
  CHECK((a.u - b.u).sup_abs() <= 1e-8);
}

TEST_CASE("eigen root never exceeds the candidate root") {
  std::mt19937_64 rng(4);
  for (const Domain& dom : {build(disk_shape(1.0, 1.0 / 16)), build(l_shape(0.5, 1.0 / 16)),
                            build_grid_domain(oracle::random_blob_mask(rng, 24), 1.0 / 24)}) {
    for (double p : {2.0, 5.0, 12.0}) {
      const RobinParams rp(1.0, p);
      const auto res = solve_eigen(dom, rp);
      CHECK(res.lambda_root <= rayleigh_root(dom, candidate(dom, 1.0), rp) + 1e-12);
    }
  }
}

TEST_CASE("Faber-Krahn at finite p: L-shape against the disk of equal area") {
  const double h = 1.0 / 32;
  const Domain ell = build(l_shape(0.5, h));
  const Domain disk = build(disk_shape(std::sqrt(ell.area() / M_PI), h));
  for (double p : {2.0, 4.0}) {
    const RobinParams rp(1.0, p);
    const double l_ell = solve_eigen(ell, rp).lambda_p;
    const double l_disk = solve_eigen(disk, rp).lambda_p;
    CHECK(l_ell >= l_disk * (1 - 0.02));
  }
}

TEST_CASE("iteration budget exhaustion carries the partial result") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 16));
  EigenOptions opts;
  opts.max_iter = 3;
  try {
    solve_eigen(disk, RobinParams(1.0, 8.0), opts);
    FAIL("expected NotConverged");
  } catch (const NotConverged<EigenResult>& e) {
    CHECK_FALSE(e.partial().converged);
    CHECK(e.partial().iterations == 3);
    CHECK(e.partial().u.min() >= 0.0);
  }
  CHECK_THROWS_AS(solve_eigen(disk, RobinParams(1.0, kInfinity)), std::invalid_argument);
}

TEST_CASE("eigen_sweep on the disk") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  const auto table = eigen_sweep(disk, 1.0, {4, 8, 16, 32, 40});
  REQUIRE(table.rows.size() == 5);
  CHECK(std::abs(table.lambda_inf_geometric - 0.5) <= 0.02);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    CHECK(r.converged);
    CHECK(r.gap == doctest::Approx(r.lambda_root - table.lambda_inf_geometric).epsilon(1e-14));
    if (i > 0) CHECK(r.p > table.rows[i - 1].p);
    // Each row agrees with the radial equation to within discretization error.
    CHECK(std::abs(r.lambda_root - oracle::radial_eigen_root(r.p, 1.0)) <= 0.01 * r.lambda_root);
  }
  for (std::size_t i = 3; i < table.rows.size(); ++i)
    CHECK(std::abs(table.rows[i].gap) <= 1.1 * std::abs(table.rows[i - 1].gap));

  REQUIRE(table.last);
  const auto check = eigenfunction_limit_check(*table.last, disk, 1.0);
  CHECK(check.violation <= 0.05);
}

TEST_CASE("eigen_sweep bookkeeping") {
  const Domain sq = build(square_shape(1.0, 1.0 / 16));
  const auto single = eigen_sweep(sq, 1.0, {3.0});
  CHECK(single.lambda_inf_geometric == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(single.rows.size() == 1);
  const auto direct = solve_eigen(sq, RobinParams(1.0, 3.0));
  CHECK(single.rows[0].lambda_p == doctest::Approx(direct.lambda_p).epsilon(1e-12));
  CHECK_THROWS_AS(eigen_sweep(sq, 1.0, {4.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(eigen_sweep(sq, 1.0, {1.0}), std::invalid_argument);
}

TEST_CASE("eigenfunction_limit_check examples") {
  const Domain disk = build(disk_shape(1.0, 1.0 / 32));
  const ScalarField w = candidate(disk, 1.0);
  const auto exact = eigenfunction_limit_check(w, 1.0 / w.max(), disk, 1.0);
  CHECK(std::abs(exact.violation) <= 1e-15);
  // Halving the target maximum scales u by 0.5 and leaves slack.
  const auto half = eigenfunction_limit_check(w, 2.0 / w.max(), disk, 1.0);
  CHECK(half.scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(half.violation < 0.0);
}
