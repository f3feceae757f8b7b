#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "langevin/noise.hpp"

namespace langevin {

// Position/velocity pair in R^n x R^n.
struct PhaseState {
  std::vector<double> x;
  std::vector<double> v;

  PhaseState() = default;
  PhaseState(std::vector<double> x_, std::vector<double> v_);
  explicit PhaseState(std::size_t n) : x(n, 0.0), v(n, 0.0) {}

  std::size_t dim() const { return x.size(); }
  bool finite() const;
};

// Coefficients of the quadratic form |z|^2_{a,b} = |x|^2 + 2b<x,v> + a|v|^2.
// Equivalent to the Euclidean norm (positive definite) exactly when b^2 < a.
struct ModifiedNorm {
  double a;
  double b;

  ModifiedNorm(double a_, double b_);
};

double modified_norm_sq(const ModifiedNorm& norm, std::span<const double> dx,
                        std::span<const double> dv);

// Norm of the difference z - w.
double modified_norm_sq(const ModifiedNorm& norm, const PhaseState& z,
                        const PhaseState& w);

// Empirical check of the sandwich (1/2)|z|^2_{a,0} <= |z|^2_{a,b} <= (3/2)|z|^2_{a,0}
// on a batch of samples.  Holds for the (a,b) pairs the constants tables
// produce; can fail for arbitrary b^2 < a (see the ratio example in tests).
struct NormEquivalenceReport {
  double min_ratio;
  double max_ratio;
  bool pass;  // every ratio in [1/2, 3/2]
  std::vector<double> ratios;
};

NormEquivalenceReport norm_equivalence_check(
    const ModifiedNorm& norm, std::span<const PhaseState> samples);

// Two chains advanced with one shared noise stream (synchronous coupling).
struct CouplingPair {
  PhaseState first;
  PhaseState second;
  NoiseStream noise;

  CouplingPair(PhaseState a, PhaseState b, NoiseStream ns)
      : first(std::move(a)), second(std::move(b)), noise(ns) {}
};

}  // namespace langevin
