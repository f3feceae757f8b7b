#include "langevin/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace langevin {

PhaseState::PhaseState(std::vector<double> x_, std::vector<double> v_)
    : x(std::move(x_)), v(std::move(v_)) {
  if (x.size() != v.size() || x.empty())
    throw std::invalid_argument("PhaseState: x and v must have equal length >= 1");
}

bool PhaseState::finite() const {
  for (double xi : x)
    if (!std::isfinite(xi)) return false;
  for (double vi : v)
    if (!std::isfinite(vi)) return false;
  return true;
}

ModifiedNorm::ModifiedNorm(double a_, double b_) : a(a_), b(b_) {
  if (!(a > 0.0)) throw std::invalid_argument("ModifiedNorm: a must be positive");
  if (!(b >= 0.0)) throw std::invalid_argument("ModifiedNorm: b must be nonnegative");
  if (!(b * b < a))
    throw std::invalid_argument(
        "ModifiedNorm: b^2 >= a, form not equivalent to the Euclidean norm");
}

double modified_norm_sq(const ModifiedNorm& norm, std::span<const double> dx,
                        std::span<const double> dv) {
  if (dx.size() != dv.size())
    throw std::invalid_argument("modified_norm_sq: dimension mismatch");
  double xx = 0.0, xv = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    xx += dx[i] * dx[i];
    xv += dx[i] * dv[i];
    vv += dv[i] * dv[i];
  }
  return xx + 2.0 * norm.b * xv + norm.a * vv;
}

double modified_norm_sq(const ModifiedNorm& norm, const PhaseState& z,
                        const PhaseState& w) {
  if (z.dim() != w.dim())
    throw std::invalid_argument("modified_norm_sq: dimension mismatch");
  double xx = 0.0, xv = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    double dx = z.x[i] - w.x[i];
    double dv = z.v[i] - w.v[i];
    xx += dx * dx;
    xv += dx * dv;
    vv += dv * dv;
  }
  return xx + 2.0 * norm.b * xv + norm.a * vv;
}

NormEquivalenceReport norm_equivalence_check(
    const ModifiedNorm& norm, std::span<const PhaseState> samples) {
  if (samples.empty())
    throw std::invalid_argument("norm_equivalence_check: empty sample list");
  const ModifiedNorm plain(norm.a, 0.0);
  NormEquivalenceReport rep;
  rep.min_ratio = 1e300;
  rep.max_ratio = -1e300;
  rep.ratios.reserve(samples.size());
  for (const PhaseState& z : samples) {
    double denom = modified_norm_sq(plain, z.x, z.v);
    if (denom == 0.0) continue;  // zero vector carries no ratio information
    double ratio = modified_norm_sq(norm, z.x, z.v) / denom;
    rep.ratios.push_back(ratio);
    if (ratio < rep.min_ratio) rep.min_ratio = ratio;
    if (ratio > rep.max_ratio) rep.max_ratio = ratio;
  }
  if (rep.ratios.empty())
    throw std::invalid_argument("norm_equivalence_check: all samples were zero");
  rep.pass = rep.min_ratio >= 0.5 && rep.max_ratio <= 1.5;
  return rep;
}

}  // namespace langevin
