#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "langevin/estimator.hpp"
#include "langevin/integrator.hpp"
#include "langevin/phase.hpp"
#include "langevin/potential.hpp"

namespace langevin {

// Distance beyond which a coupled pair is declared divergent (recorded as
// data, not an error, so stability maps can be drawn).
inline constexpr double kDivergenceThreshold = 1e12;

struct CoupledRunResult {
  // Modified-norm distances |dz_k|_{a,b}, k = 0..steps; truncated just after
  // the entry that crossed the divergence threshold.
  std::vector<double> distances;
  bool divergent = false;
  long long diverged_at = -1;  // step index of the crossing entry
};

// Two chains of the same kinetic scheme advanced with one shared noise
// bundle per step (synchronous coupling: shared Gaussians, and shared
// midpoint draw for rOABAO).  On quadratic targets the recorded distances
// are noise-independent: the difference dynamics are linear.
CoupledRunResult coupled_run(Scheme s, const Potential& pot,
                             const ModifiedNorm& norm, const PhaseState& z0,
                             const PhaseState& z1, const IntegratorParams& p,
                             long long steps, NoiseStream& ns);

struct CoupledSgResult {
  // Monte Carlo estimate of E |dz_k|^2_{a,b} over surviving replicas, with
  // standard errors; NaN-filled if every replica diverged.
  std::vector<double> mean_sq;
  std::vector<double> se;
  int replicas = 0;
  int divergent_replicas = 0;
};

// Synchronously coupled stochastic-gradient run: per step, both chains
// consume one shared batch and one shared noise bundle.  Replica r draws
// from NoiseStream(seed, r).  Gradient-reusing schemes have their force
// caches primed with a shared initial batch, so a steps-long replica costs
// steps+1 estimator evaluations per chain (steps otherwise).  With a full
// (deterministic) estimator every replica reproduces coupled_run exactly.
CoupledSgResult coupled_run_sg(Scheme s, const GradientEstimator& est,
                               const ModifiedNorm& norm, const PhaseState& z0,
                               const PhaseState& z1, const IntegratorParams& p,
                               long long steps, int replicas, std::uint64_t seed);

// Overdamped analogue on positions only: Euclidean squared distances
// E |x_k - y_k|^2.  OD-LM's noise caches are primed with one shared Gaussian
// vector, so its difference dynamics match OD-EM's exactly.
CoupledSgResult coupled_run_overdamped(Scheme s, const GradientEstimator& est,
                                       std::span<const double> x0,
                                       std::span<const double> y0,
                                       const IntegratorParams& p, long long steps,
                                       int replicas, std::uint64_t seed);

// Per-step contraction factor fitted by least squares on log distance over
// the post-burn-in window: rho_hat = exp(slope).  Requires
// trajectory.size() > burn_in + 10 and positive entries in the window (a
// zero distance means the chains merged and the fit is meaningless).
double empirical_rate(std::span<const double> trajectory, std::size_t burn_in);

}  // namespace langevin
