#include "robin/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string_view>

namespace robin {

RobinParams::RobinParams(double beta_, double p_) : beta(beta_), p(p_) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
}

double PowerSum::log() const { return zero() ? -kInfinity : p * std::log(scale) + std::log(scaled); }

double PowerSum::root() const { return zero() ? 0.0 : scale * std::exp(std::log(scaled) / p); }

double PowerSum::value() const { return zero() ? 0.0 : std::exp(log()); }

double log_add(double a, double b) {
  if (a == -kInfinity) return b;
  if (b == -kInfinity) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

PowerSum power_sum(std::span<const double> samples, std::span<const double> weights, double p) {
  return power_sum(samples, weights, p, {});
}

PowerSum power_sum(std::span<const double> samples, std::span<const double> weights, double p,
                   std::span<double> dlog) {
  if (samples.size() != weights.size()) throw std::invalid_argument("samples and weights differ in length");
  const bool want = !dlog.empty();
  if (want && dlog.size() != samples.size()) throw std::invalid_argument("derivative buffer has the wrong length");
  PowerSum s;
  s.p = p;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (weights[i] > 0.0) s.scale = std::max(s.scale, std::abs(samples[i]));
  if (want) std::fill(dlog.begin(), dlog.end(), 0.0);
  if (s.scale == 0.0) return s;
  const double inv = 1.0 / s.scale;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double r = std::abs(samples[i]) * inv;
    if (r == 0.0) continue;
    const double rp1 = std::pow(r, p - 1.0);
    s.scaled += weights[i] * rp1 * r;
    if (want) dlog[i] = weights[i] * rp1;
  }
  if (want) {
    const double f = p * inv / s.scaled;
    for (double& d : dlog) d *= f;
  }
  return s;
}

double stabilized_p_norm(std::span<const double> samples, std::span<const double> weights, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p-norm needs p >= 1");
  return power_sum(samples, weights, p).root();
}

namespace {

double naive_sum(std::span<const double> samples, std::span<const double> weights, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (weights[i] > 0.0) total += weights[i] * std::pow(std::abs(samples[i]), p);
  return total;
}

// Direct summation is used when the largest term stays far from overflow.
bool safe_raw(const PowerSum& s, double p) { return s.zero() || p * std::log(s.scale) < 600.0; }

}  // namespace

std::vector<double> gradient_norms(const Domain& dom, std::span<const double> w) {
  const auto g = gradient(dom, w);
  std::vector<double> out(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) out[t] = norm(g[t]);
  return out;
}

std::vector<double> face_midpoint_values(const Domain& dom, std::span<const double> w) {
  std::vector<double> out;
  out.reserve(dom.faces().size());
  for (const auto& f : dom.faces()) out.push_back(0.5 * (w[f.a] + w[f.b]));
  return out;
}

std::vector<double> centroid_values(const Domain& dom, std::span<const double> w) {
  std::vector<double> out;
  out.reserve(dom.num_triangles());
  for (const auto& t : dom.triangles()) out.push_back((w[t[0]] + w[t[1]] + w[t[2]]) / 3.0);
  return out;
}

std::vector<double> face_weights(const Domain& dom) {
  std::vector<double> out;
  out.reserve(dom.faces().size());
  for (const auto& f : dom.faces()) out.push_back(f.weight);
  return out;
}

std::vector<double> lumped_mass(const Domain& dom) {
  std::vector<double> m(dom.num_vertices(), 0.0);
  const double third = dom.triangle_area() / 3.0;
  for (const auto& t : dom.triangles())
    for (int v : t) m[v] += third;
  return m;
}

EnergyTerms p_energy(const Domain& dom, const ScalarField& w, const RobinParams& rp) {
  require_on(dom, w);
  if (!rp.finite()) throw std::invalid_argument("p_energy needs finite p; use sup_norms for p = infinity");
  const double p = rp.p;
  const auto gn = gradient_norms(dom, w.values());
  const std::vector<double> areas(gn.size(), dom.triangle_area());
  const auto mid = face_midpoint_values(dom, w.values());
  const auto fw = face_weights(dom);

  const PowerSum g = power_sum(gn, areas, p);
  const PowerSum b = power_sum(mid, fw, p);
  EnergyTerms e;
  e.log_grad = g.log();
  e.log_bdry = b.zero() ? -kInfinity : p * std::log(rp.beta) + b.log();
  const PowerSum beta_scaled{rp.beta * b.scale, b.scaled, p};
  e.raw = safe_raw(g, p) && safe_raw(beta_scaled, p);
  if (e.raw) {
    e.grad_term = naive_sum(gn, areas, p);
    e.bdry_term = std::pow(rp.beta, p) * naive_sum(mid, fw, p);
  } else {
    e.grad_term = std::exp(e.log_grad);
    e.bdry_term = std::exp(e.log_bdry);
  }
  return e;
}

PowerSum volume_power(const Domain& dom, std::span<const double> w, double p) {
  const auto c = centroid_values(dom, w);
  const std::vector<double> areas(c.size(), dom.triangle_area());
  return power_sum(c, areas, p);
}

double log_rayleigh_quotient(const Domain& dom, const ScalarField& w, const RobinParams& rp) {
  const EnergyTerms e = p_energy(dom, w, rp);
  const PowerSum vol = volume_power(dom, w.values(), rp.p);
  if (vol.zero()) throw ZeroField("Rayleigh quotient of a field with zero L^p norm");
  return e.log_total() - vol.log();
}

double rayleigh_quotient(const Domain& dom, const ScalarField& w, const RobinParams& rp) {
  return std::exp(log_rayleigh_quotient(dom, w, rp));
}

double rayleigh_root(const Domain& dom, const ScalarField& w, const RobinParams& rp) {
  return std::exp(log_rayleigh_quotient(dom, w, rp) / rp.p);
}

SupNorms sup_norms(const Domain& dom, const ScalarField& w) {
  require_on(dom, w);
  SupNorms s;
  for (double g : gradient_norms(dom, w.values())) s.grad_sup = std::max(s.grad_sup, g);
  for (double m : face_midpoint_values(dom, w.values())) s.bdry_sup = std::max(s.bdry_sup, std::abs(m));
  s.vol_sup = w.sup_abs();
  return s;
}

double sup_quotient(const Domain& dom, const ScalarField& w, double beta) {
  const SupNorms s = sup_norms(dom, w);
  if (s.vol_sup == 0.0) throw ZeroField("sup quotient of the zero field");
  return std::max(s.grad_sup, beta * s.bdry_sup) / s.vol_sup;
}

void write_field_csv(const std::string& path, const Domain& dom, const ScalarField& w) {
  require_on(dom, w);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "ix,iy,value\n";
  char buf[64];
  for (std::size_t v = 0; v < w.size(); ++v) {
    const auto [ix, iy] = dom.lattice(static_cast<int>(v));
    const auto res = std::to_chars(buf, buf + sizeof buf, w[v]);
    out << ix << ',' << iy << ',' << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

ScalarField read_field_csv(const std::string& path, const Domain& dom) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ix,iy,value", 0) != 0)
    throw std::runtime_error(path + ": expected header ix,iy,value");
  std::vector<double> values(dom.num_vertices(), 0.0);
  std::vector<std::uint8_t> seen(dom.num_vertices(), 0);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int ix = 0;
    int iy = 0;
    double value = 0.0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(p, end, ix);
    if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ',') throw std::runtime_error(path + ": bad ix on line " + std::to_string(lineno));
    auto r2 = std::from_chars(r1.ptr + 1, end, iy);
    if (r2.ec != std::errc{} || r2.ptr == end || *r2.ptr != ',') throw std::runtime_error(path + ": bad iy on line " + std::to_string(lineno));
    auto r3 = std::from_chars(r2.ptr + 1, end, value);
    if (r3.ec != std::errc{}) throw std::runtime_error(path + ": bad value on line " + std::to_string(lineno));
    const int v = dom.vertex_at(ix, iy);
    if (v < 0) throw DomainMismatch(path + ": line " + std::to_string(lineno) + " is not a domain vertex");
    values[v] = value;
    seen[v] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw DomainMismatch(path + ": field does not cover every vertex");
  return ScalarField(std::move(values));
}

}  // namespace robin
