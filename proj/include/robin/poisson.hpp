#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robin/distance.hpp"
#include "robin/domain.hpp"
#include "robin/fields.hpp"
#include "robin/scalar_field.hpp"
#include "robin/solver.hpp"

namespace robin {

enum class PoissonMethod { Newton, ConjugateGradient };

struct PoissonOptions {
  double tol = 1e-10;  // sup-norm of the assembled residual, relative to 1 + ||f||_inf
  int max_iter = 500;  // per continuation stage
  PoissonMethod method = PoissonMethod::Newton;
  bool continuation = true;
  double continuation_factor = 2.0;
  double stage_tol = 1e-6;  // tolerance of intermediate continuation stages
};

struct PoissonResult {
  double p = 2.0;
  ScalarField v;
  double j_value = 0.0;
  double residual_norm = 0.0;  // sup-norm of the assembled gradient of J_p
  int iterations = 0;          // summed over continuation stages
  bool converged = false;
};

/// J_p(phi) = (1/p) sum_T |T| |grad phi|^p + (beta^p / p) sum_F weight_F |phi(mid F)|^p
///            - sum_i m_i f_i phi_i, with lumped masses m_i.
struct PoissonEnergy {
  double j = 0.0;
  std::vector<double> grad;  // the discrete weak-form residual
};

PoissonEnergy poisson_energy(const Domain& dom, std::span<const double> f, std::span<const double> phi,
                             const RobinParams& rp, bool want_grad = true);

/// Minimizes J_p for f >= 0. Throws NotConverged<PoissonResult>.
PoissonResult solve_p_poisson(const Domain& dom, const ScalarField& f, const RobinParams& rp,
                              const PoissonOptions& opts = {}, const std::optional<ScalarField>& start = std::nullopt);

/// Closed-form radial solution on the unit ball for f = 1; p may be kInfinity.
double radial_oracle_ball(int n, double p, double beta, double r);

/// Closed-form radial solution on the unit ball for f = indicator of B_eps;
/// requires p > n or p = kInfinity.
double radial_oracle_annular(int n, double p, double beta, double eps, double r);

/// 1/beta + d, the pointwise-maximal field with |grad| <= 1 and beta |phi| <= 1 on the boundary.
ScalarField limit_maximal_solution(const Domain& dom, double beta);

/// -sum_i m_i f_i phi_i.
double j_infinity(const Domain& dom, const ScalarField& f, const ScalarField& phi);

class DisconnectedComponent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AmleOptions {
  double tol = 1e-10;
  int max_sweeps = 2000000;
  /// Sweep order over free vertices; empty means increasing vertex index.
  std::vector<int> order;
};

/// Vertices sharing an inside cell with v (up to 8).
std::vector<int> cell_neighbours(const Domain& dom, int v);

/// Discrete infinity-harmonic extension by the midpoint iteration
/// u <- (max + min) / 2 over cell neighbours, Gauss-Seidel in `order`.
ScalarField amle_extend(const Domain& dom, const std::vector<std::uint8_t>& fixed, const ScalarField& values,
                        const AmleOptions& opts = {});

/// Largest amount, in length units, by which phi breaks the limit
/// constraints: phi - (1/beta + d), |phi_i - phi_j| - |x_i - x_j| over cell
/// neighbours, and |phi| - 1/beta at boundary vertices.
double feasibility_violation(const Domain& dom, const ScalarField& phi, double beta);

class WitnessConstructionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UniquenessReport {
  RidgeSet ridge;
  std::vector<int> support;           // f > 0, dilated by one cell
  std::vector<std::uint8_t> in_support;
  bool included = false;
  std::vector<int> uncovered;         // ridge members outside the support
  std::optional<ScalarField> witness;
  std::vector<int> witness_region;    // vertices where the witness was re-extended
  double witness_objective_gap = 0.0; // |J_inf(witness) - J_inf(1/beta + d)|
  double witness_max_difference = 0.0;
  double witness_violation = 0.0;
};

UniquenessReport uniqueness_certificate(const Domain& dom, const ScalarField& f, double beta,
                                        const AmleOptions& amle = {});

/// max over vertices of v - (1/beta + d).
double upper_envelope_check(const ScalarField& v, const Domain& dom, double beta);

}  // namespace robin
