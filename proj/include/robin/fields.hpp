#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "robin/domain.hpp"
#include "robin/scalar_field.hpp"

namespace robin {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Boundary stiffness beta and exponent p; p may be kInfinity.
struct RobinParams {
  double beta = 1.0;
  double p = 2.0;

  RobinParams() = default;
  RobinParams(double beta_, double p_);
  bool finite() const { return p != kInfinity; }
};

/// sum_i w_i |s_i|^p held as scale^p * scaled, scale = max |s_i| over w_i > 0.
/// This is the single accumulation kernel used for every p-power in the code.
struct PowerSum {
  double scale = 0.0;
  double scaled = 0.0;
  double p = 1.0;

  bool zero() const { return scale == 0.0 || scaled == 0.0; }
  double log() const;
  /// (sum)^(1/p) in log space.
  double root() const;
  /// The sum itself; may be +inf when it exceeds double range.
  double value() const;
};

PowerSum power_sum(std::span<const double> samples, std::span<const double> weights, double p);
/// Same kernel; also stores d(log sum)/d|s_i| in dlog (sized like samples).
PowerSum power_sum(std::span<const double> samples, std::span<const double> weights, double p,
                   std::span<double> dlog);

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
double log_add(double a, double b);

/// (sum w_i |s_i|^p)^(1/p). Throws on length mismatch or p < 1.
double stabilized_p_norm(std::span<const double> samples, std::span<const double> weights, double p);

/// Per-triangle |grad w|, boundary-face midpoint values, triangle centroid values.
std::vector<double> gradient_norms(const Domain& dom, std::span<const double> w);
std::vector<double> face_midpoint_values(const Domain& dom, std::span<const double> w);
std::vector<double> centroid_values(const Domain& dom, std::span<const double> w);
std::vector<double> face_weights(const Domain& dom);
/// Lumped vertex masses (area/3 from every incident triangle).
std::vector<double> lumped_mass(const Domain& dom);

struct EnergyTerms {
  double grad_term = 0.0;  // sum_T |T| |grad w|^p
  double bdry_term = 0.0;  // beta^p sum_F weight_F |w(mid F)|^p
  double log_grad = -kInfinity;
  double log_bdry = -kInfinity;
  bool raw = true;  // terms summed directly (no overflow risk) rather than exp(log)

  double log_total() const { return log_add(log_grad, log_bdry); }
};

/// Throws std::invalid_argument for p = infinity.
EnergyTerms p_energy(const Domain& dom, const ScalarField& w, const RobinParams& rp);

/// sum_T |T| |w(centroid T)|^p in kernel form.
PowerSum volume_power(const Domain& dom, std::span<const double> w, double p);

class ZeroField : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log of (grad_term + bdry_term) / ||w||_p^p.
double log_rayleigh_quotient(const Domain& dom, const ScalarField& w, const RobinParams& rp);
double rayleigh_quotient(const Domain& dom, const ScalarField& w, const RobinParams& rp);
/// quotient^(1/p), taken in log space.
double rayleigh_root(const Domain& dom, const ScalarField& w, const RobinParams& rp);

struct SupNorms {
  double grad_sup = 0.0;
  double bdry_sup = 0.0;
  double vol_sup = 0.0;
};

SupNorms sup_norms(const Domain& dom, const ScalarField& w);

/// The p = infinity quotient max(grad_sup, beta * bdry_sup) / vol_sup.
double sup_quotient(const Domain& dom, const ScalarField& w, double beta);

/// CSV with header `ix,iy,value`, values written with 17 significant digits.
void write_field_csv(const std::string& path, const Domain& dom, const ScalarField& w);
ScalarField read_field_csv(const std::string& path, const Domain& dom);

}  // namespace robin
