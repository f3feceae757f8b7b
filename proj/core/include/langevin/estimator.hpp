#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "langevin/noise.hpp"
#include "langevin/potential.hpp"

namespace langevin {

enum class GradientKind { full, subsampled, variance_reduced };

const char* to_string(GradientKind k);
GradientKind parse_gradient_kind(const std::string& tag);

// Uniform batch of size b from {0..N-1} without replacement (Floyd's
// algorithm: exactly b stream draws).  Returned sorted.
std::vector<std::int32_t> draw_batch(std::size_t n, std::size_t b, NoiseStream& ns);

// Unbiased gradient estimator over a decomposable potential.
//   full:              exact gradient, no batch.
//   subsampled:        prior + (N/b) * sum of b sampled data terms.
//   variance_reduced:  full gradient at a required anchor point
//                      + (prior at x - prior at anchor)
//                      + (N/b) * sum of (sampled term at x - same term at
//                      anchor); at x == anchor every difference cancels
//                      bitwise, so eval returns the full gradient exactly.
class GradientEstimator {
 public:
  GradientEstimator(const DecomposablePotential& pot, GradientKind kind,
                    std::size_t batch_size, std::vector<double> anchor = {});

  const DecomposablePotential& potential() const { return pot_; }
  GradientKind kind() const { return kind_; }
  std::size_t dim() const { return pot_.dim(); }
  std::size_t data_size() const { return pot_.data_size(); }
  std::size_t batch_size() const { return batch_; }
  bool stochastic() const { return kind_ != GradientKind::full; }
  const std::vector<double>& anchor() const { return anchor_; }

  std::vector<std::int32_t> sample_batch(NoiseStream& ns) const;

  // Evaluate at x with an explicit batch (ignored for kind full).
  void eval(std::span<const double> x, std::span<const std::int32_t> batch,
            std::span<double> g) const;

  // Draw a fresh batch from ns, then evaluate.
  void eval(std::span<const double> x, NoiseStream& ns, std::span<double> g) const;

  // out = (D_x G(x, batch) - Hessian U(x)) * p.  The prior cancels; only data
  // terms contribute.  Zero for kind full.
  void deviation_vec(std::span<const double> x,
                     std::span<const std::int32_t> batch,
                     std::span<const double> p, std::span<double> out) const;

  // Spectral norm squared of the deviation at (x, batch), by power iteration
  // on the symmetric operator (D-H)^T (D-H).
  double deviation_norm_sq(std::span<const double> x,
                           std::span<const std::int32_t> batch) const;

 private:
  const DecomposablePotential& pot_;
  GradientKind kind_;
  std::size_t batch_;
  std::vector<double> anchor_;
  std::vector<double> anchor_full_grad_;   // exact gradient at the anchor
  std::vector<double> anchor_prior_grad_;  // prior part of it, for the diff
};

GradientEstimator make_estimator(const DecomposablePotential& pot, GradientKind kind,
                                 std::size_t batch_size,
                                 std::vector<double> anchor = {});

// Assumption bound C_G = sup_x E | D_x G(x, W) - Hessian U(x) |^2 estimated by
// Monte Carlo over batches at a set of probe points (max over probes).
struct CurvatureNoiseBound {
  double value;                       // max over probe points
  double ci_half_width;               // 95% CI at the max probe
  std::vector<double> per_probe;      // per-probe means
  std::vector<double> per_probe_ci;   // per-probe 95% half widths
  bool sampled;                       // false when exact (full estimator)
};

CurvatureNoiseBound estimate_CG(const GradientEstimator& est,
                                std::span<const std::vector<double>> probes,
                                int samples_per_probe, NoiseStream& ns);

// GradientSource adapters.

// Stochastic gradient drawing a fresh batch per evaluation from its stream.
class EstimatorGradient final : public GradientSource {
 public:
  EstimatorGradient(const GradientEstimator& est, NoiseStream& ns)
      : est_(est), ns_(ns) {}
  void eval(std::span<const double> x, std::span<double> g) override {
    est_.eval(x, ns_, g);
    ++evals_;
  }

 private:
  const GradientEstimator& est_;
  NoiseStream& ns_;
};

// Evaluates at an externally chosen batch; coupled chains point two of these
// at the same batch storage so each step's gradient noise is shared.
class FixedBatchGradient final : public GradientSource {
 public:
  FixedBatchGradient(const GradientEstimator& est,
                     const std::vector<std::int32_t>& batch)
      : est_(est), batch_(batch) {}
  void eval(std::span<const double> x, std::span<double> g) override {
    est_.eval(x, batch_, g);
    ++evals_;
  }

 private:
  const GradientEstimator& est_;
  const std::vector<std::int32_t>& batch_;
};

}  // namespace langevin
