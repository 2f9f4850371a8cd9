#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "robin/domain.hpp"

namespace robin {

/// One real value per vertex of a Domain, indexed like Domain vertices.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("ScalarField values must be finite");
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& vec() const { return values_; }

  double max() const;
  double min() const;
  double sup_abs() const;

 private:
  std::vector<double> values_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

/// Throws DomainMismatch when the field is not sized for the domain.
void require_on(const Domain& dom, const ScalarField& w);

/// Field sampled from a function of position.
template <typename F>
ScalarField sample(const Domain& dom, F&& fn) {
  std::vector<double> v(dom.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(dom.position(static_cast<int>(i)));
  return ScalarField(std::move(v));
}

/// Exact gradient of the piecewise-linear interpolant on each triangle.
std::vector<Point> gradient(const Domain& dom, std::span<const double> values);
inline std::vector<Point> gradient(const Domain& dom, const ScalarField& w) {
  require_on(dom, w);
  return gradient(dom, w.values());
}

/// Bilinear interpolation of per-vertex values; nullopt outside inside cells.
std::optional<double> interpolate(const Domain& dom, std::span<const double> values, Point p);

}  // namespace robin
