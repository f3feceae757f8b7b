#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "langevin/estimator.hpp"
#include "langevin/integrator.hpp"
#include "langevin/potential.hpp"

namespace langevin {

// Batch-means effective sample size with batch size floor(sqrt(n)):
//   ESS = n * marginal variance / (b * variance of the batch means).
// Requires at least 100 samples; a (near-)constant series has no defined
// autocorrelation time and throws.
double ess(std::span<const double> series);

// Determinant-ratio multivariate version over a row-major (n x dim) series:
//   ESS = n * (det Lambda / det Sigma_bm)^(1/dim),
// Lambda the sample covariance and Sigma_bm the batch-means long-run
// covariance estimate.
double ess_multivariate(std::span<const double> series, std::size_t dim);

using TestFunction = std::function<double(std::span<const double>)>;

struct RunSummary {
  Scheme scheme;
  double h = 0.0;
  double gamma = 0.0;
  GradientKind grad = GradientKind::full;
  std::size_t batch = 0;
  int replicas = 0;
  double mean = 0.0;       // test-function mean (replica average)
  double se = 0.0;         // sd of replica means / sqrt(replicas)
  double ess = 0.0;        // summed over replicas (NaN below 100 samples)
  long long grad_evals = 0;  // total across replicas
  double seconds = 0.0;    // wall time (not part of any file output)
  bool failed = false;     // some replica diverged
  long long failed_at = -1;  // earliest diverging iteration
};

// Sampling run: `replicas` chains on independent streams (stream id = replica
// index), initialized at the potential's minimizer with v0 ~ N(0, I) for
// kinetic schemes.  Records f(x_k) for the iterations after burn_in; f
// defaults to U itself.  A null estimator means exact gradients; otherwise
// batches are drawn from the replica's stream.  Divergence marks the summary
// failed (statistics NaN) rather than throwing.
RunSummary run_sampler(Scheme s, const Potential& pot, const GradientEstimator* est,
                       const IntegratorParams& p, long long iterations,
                       long long burn_in, int replicas, std::uint64_t seed,
                       const TestFunction& f = {});

struct BiasCell {
  Scheme scheme;
  double h = 0.0;
  double gamma = 0.0;
  GradientKind grad = GradientKind::full;
  std::size_t batch = 0;
  double bias = 0.0;  // run mean - reference mean
  double se = 0.0;
  double ess = 0.0;
  long long grad_evals = 0;
  bool ok = false;  // false -> the N.A. convention (diverged / no samples)
};

struct BiasTable {
  double reference_mean = 0.0;
  double reference_se = 0.0;
  bool reference_internal = false;
  std::vector<BiasCell> cells;  // schemes x hs x gammas, row-major
};

// Bias of E[f] per (scheme, h, gamma) cell against a reference mean.  When no
// reference is supplied one is computed internally: a full-gradient BAOAB run
// at a quarter of the smallest stepsize with 10x the iterations.  Divergent
// cells are recorded ok=false, never thrown.
BiasTable bias_table(std::span<const Scheme> schemes, const Potential& pot,
                     const GradientEstimator* est, std::span<const double> hs,
                     std::span<const double> gammas, long long iterations,
                     long long burn_in, int replicas, std::uint64_t seed,
                     std::optional<double> reference_mean = std::nullopt,
                     const TestFunction& f = {});

}  // namespace langevin
