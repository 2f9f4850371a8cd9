#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "robin/domain.hpp"
#include "robin/scalar_field.hpp"

namespace robin {

class NonpositiveField : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StencilFlag : std::uint8_t {
  Ok = 0,
  SmallGradient = 1,  // |grad u| <= tol, value reported as 0
  Unavailable = 2,    // boundary vertex, or x +- h g leaves the inside cells
};

struct InfinityLaplacian {
  ScalarField value;
  std::vector<StencilFlag> flag;
};

/// |grad u|^2 (u(x+hg) - 2u(x) + u(x-hg)) / h^2 with g the unit direction of
/// the vertex-averaged gradient. Off-grid samples use Catmull-Rom bicubic
/// interpolation, or bilinear where the 4x4 block leaves the vertex set.
InfinityLaplacian infinity_laplacian(const Domain& dom, const ScalarField& u, double tol = 1e-12);

/// Mean of incident-triangle |grad u| minus lambda u, per vertex.
ScalarField eikonal_residual(const Domain& dom, const ScalarField& u, double lambda);

struct ResidualOptions {
  int ridge_dilation = 2;  // in lattice steps (Chebyshev)
  double gradient_tol = 1e-12;
  /// Optional per-vertex support indicator; vertices whose cell neighbours
  /// straddle its edge are masked as well.
  std::vector<std::uint8_t> support;
};

struct Quantiles {
  std::size_t count = 0;
  double q50 = 0.0;
  double q95 = 0.0;
  double sup = 0.0;
};

struct ResidualReport {
  ScalarField interior_residual;        // min{|grad u| - lambda u, -Delta_inf u}; 0 on boundary vertices
  std::vector<double> boundary_residual;  // -min{|grad u| - beta u, -du/dnu} per face
  std::vector<std::uint8_t> masked;     // per vertex
  std::vector<std::uint8_t> face_masked;
  std::vector<int> masked_vertices;
  Quantiles interior;                   // of |residual| over unmasked interior vertices
  Quantiles boundary;                   // of |residual| over unmasked faces
};

/// Nearest-rank quantiles of |values|.
Quantiles abs_quantiles(std::vector<double> values);

/// Throws NonpositiveField when min u <= 0.
ResidualReport limit_pde_residual(const Domain& dom, const ScalarField& u, double lambda, double beta,
                                  const ResidualOptions& opts = {});

/// Writes <stem>_interior.csv (field), <stem>_mask.csv (field, 0/1) and
/// <stem>_faces.csv (ax,ay,bx,by,residual,masked).
void write_residual_csvs(const std::string& stem, const Domain& dom, const ResidualReport& rep);

}  // namespace robin
