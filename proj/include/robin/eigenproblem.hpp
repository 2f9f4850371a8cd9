#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robin/domain.hpp"
#include "robin/fields.hpp"
#include "robin/scalar_field.hpp"
#include "robin/solver.hpp"

namespace robin {

struct EigenOptions {
  double tol = 1e-8;    // on the scale-free gradient norm, see EigenResult::grad_norm
  int max_iter = 20000;
  int memory = 8;       // quasi-Newton history length; 0 gives plain preconditioned descent
  bool check_monotone = true;
};

struct EigenResult {
  double p = 2.0;
  double log_lambda = 0.0;
  double lambda_p = 0.0;
  double lambda_root = 0.0;
  ScalarField u;  // nonnegative, unit L^p norm
  int iterations = 0;
  /// sqrt(g^T M^-1 g) * ||u||_M with g the gradient of the log quotient and M
  /// the lumped mass; invariant under scaling of u and of the grid.
  double grad_norm = 0.0;
  bool converged = false;
};

/// Log quotient and its gradient with respect to the vertex values.
struct QuotientGradient {
  double log_q = 0.0;
  std::vector<double> grad;
};

QuotientGradient log_quotient_gradient(const Domain& dom, std::span<const double> w, const RobinParams& rp);

/// Minimizes the Rayleigh quotient over nonnegative fields. The initial guess
/// is 1/beta + d unless `start` is given. Throws NotConverged<EigenResult> or
/// LineSearchStall<EigenResult>.
EigenResult solve_eigen(const Domain& dom, const RobinParams& rp, const EigenOptions& opts = {},
                        const std::optional<ScalarField>& start = std::nullopt);

struct SweepRow {
  double p = 0.0;
  double lambda_p = 0.0;
  double lambda_root = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;
};

struct SweepTable {
  double beta = 1.0;
  double lambda_inf_geometric = 0.0;
  std::vector<SweepRow> rows;
  std::optional<EigenResult> last;  // solution at the largest p that produced one
};

/// Solves for each p in increasing order, warm-starting from the previous
/// solution. Failures are recorded in the row note and the sweep continues.
SweepTable eigen_sweep(const Domain& dom, double beta, const std::vector<double>& p_list,
                       const EigenOptions& opts = {});

void write_sweep_csv(const std::string& path, const SweepTable& table);

struct LimitCheck {
  double scale = 1.0;      // factor applied to u so that max u = 1/lambda_root
  double violation = 0.0;  // max over vertices of scale*u - (1/beta + d)
};

LimitCheck eigenfunction_limit_check(const ScalarField& u, double lambda_root, const Domain& dom, double beta);
LimitCheck eigenfunction_limit_check(const EigenResult& res, const Domain& dom, double beta);

}  // namespace robin
