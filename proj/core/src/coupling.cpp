#include "langevin/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "langevin/parallel.hpp"

namespace langevin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluate the current force into the reuse cache so the first step's opening
// force comes from the supplied source (matters when that source carries a
// shared stochastic batch).
void prime_force_cache(IntegratorState& st, GradientSource& grad) {
  st.grad_cache.resize(st.z.dim());
  grad.eval(st.z.x, st.grad_cache);
  st.grad_site = st.z.x;
}

// One replica of a synchronously coupled kinetic run, recording squared
// modified-norm distances.  Returns true on survival, false on divergence
// (trajectory then holds +inf from the crossing entry on).
bool coupled_replica_sq(Scheme s, const GradientEstimator& est,
                        const ModifiedNorm& norm, const PhaseState& z0,
                        const PhaseState& z1, const IntegratorParams& p,
                        long long steps, NoiseStream& ns,
                        std::vector<double>& sq_out) {
  const std::size_t n = z0.dim();
  IntegratorState a(z0), b(z1);
  std::vector<std::int32_t> batch;
  FixedBatchGradient grad_a(est, batch), grad_b(est, batch);

  if (reuses_gradient(s)) {
    batch = est.sample_batch(ns);
    prime_force_cache(a, grad_a);
    prime_force_cache(b, grad_b);
  }
  if (s == Scheme::bbk) {
    // Shared boundary xi for the first opening half-kick; it cancels in the
    // difference, so the contraction bounds are unaffected by the priming.
    a.noise_cache = ns.gaussian_vector(n);
    b.noise_cache = a.noise_cache;
  }

  sq_out.assign(static_cast<std::size_t>(steps) + 1, kNaN);
  sq_out[0] = modified_norm_sq(norm, a.z, b.z);
  for (long long k = 1; k <= steps; ++k) {
    batch = est.sample_batch(ns);
    const StepNoise noise = draw_step_noise(s, n, p, ns);
    try {
      step_with_noise(s, a, grad_a, p, noise);
      step_with_noise(s, b, grad_b, p, noise);
    } catch (const NonFiniteError&) {
      for (long long j = k; j <= steps; ++j)
        sq_out[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
      return false;
    }
    const double d2 = modified_norm_sq(norm, a.z, b.z);
    sq_out[static_cast<std::size_t>(k)] = d2;
    if (d2 > kDivergenceThreshold * kDivergenceThreshold) {
      for (long long j = k + 1; j <= steps; ++j)
        sq_out[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
      return false;
    }
  }
  return true;
}

void validate_pair(std::size_t pot_dim, std::size_t d0, std::size_t d1, long long steps,
                   int replicas) {
  if (d0 != pot_dim || d1 != pot_dim)
    throw std::invalid_argument("coupled run: state dimension does not match potential");
  if (steps < 1) throw std::invalid_argument("coupled run: need steps >= 1");
  if (replicas < 1) throw std::invalid_argument("coupled run: need replicas >= 1");
}

CoupledSgResult aggregate_replicas(const std::vector<std::vector<double>>& sq,
                                   const std::vector<char>& survived,
                                   long long steps) {
  CoupledSgResult out;
  out.replicas = static_cast<int>(sq.size());
  const std::size_t len = static_cast<std::size_t>(steps) + 1;
  out.mean_sq.assign(len, kNaN);
  out.se.assign(len, kNaN);
  int alive = 0;
  for (char c : survived) alive += c ? 1 : 0;
  out.divergent_replicas = out.replicas - alive;
  if (alive == 0) return out;
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < sq.size(); ++r)
      if (survived[r]) sum += sq[r][k];
    const double mean = sum / alive;
    out.mean_sq[k] = mean;
    if (alive >= 2) {
      double ss = 0.0;
      for (std::size_t r = 0; r < sq.size(); ++r)
        if (survived[r]) ss += (sq[r][k] - mean) * (sq[r][k] - mean);
      out.se[k] = std::sqrt(ss / (alive - 1.0) / alive);
    } else {
      out.se[k] = 0.0;
    }
  }
  return out;
}

}  // namespace

CoupledRunResult coupled_run(Scheme s, const Potential& pot,
                             const ModifiedNorm& norm, const PhaseState& z0,
                             const PhaseState& z1, const IntegratorParams& p,
                             long long steps, NoiseStream& ns) {
  if (!is_kinetic(s))
    throw std::invalid_argument("coupled_run: kinetic schemes only; see coupled_run_overdamped");
  validate_pair(pot.dim(), z0.dim(), z1.dim(), steps, 1);

  const std::size_t n = pot.dim();
  IntegratorState a(z0), b(z1);
  PotentialGradient grad_a(pot), grad_b(pot);
  if (s == Scheme::bbk) {
    a.noise_cache = ns.gaussian_vector(n);
    b.noise_cache = a.noise_cache;
  }

  CoupledRunResult out;
  out.distances.reserve(static_cast<std::size_t>(steps) + 1);
  out.distances.push_back(std::sqrt(modified_norm_sq(norm, a.z, b.z)));
  for (long long k = 1; k <= steps; ++k) {
    const StepNoise noise = draw_step_noise(s, n, p, ns);
    try {
      step_with_noise(s, a, grad_a, p, noise);
      step_with_noise(s, b, grad_b, p, noise);
    } catch (const NonFiniteError&) {
      out.distances.push_back(std::numeric_limits<double>::infinity());
      out.divergent = true;
      out.diverged_at = k;
      break;
    }
    const double d = std::sqrt(modified_norm_sq(norm, a.z, b.z));
    out.distances.push_back(d);
    if (d > kDivergenceThreshold) {
      out.divergent = true;
      out.diverged_at = k;
      break;
    }
  }
  return out;
}

CoupledSgResult coupled_run_sg(Scheme s, const GradientEstimator& est,
                               const ModifiedNorm& norm, const PhaseState& z0,
                               const PhaseState& z1, const IntegratorParams& p,
                               long long steps, int replicas, std::uint64_t seed) {
  if (!is_kinetic(s))
    throw std::invalid_argument("coupled_run_sg: kinetic schemes only; see coupled_run_overdamped");
  validate_pair(est.dim(), z0.dim(), z1.dim(), steps, replicas);

  std::vector<std::vector<double>> sq(static_cast<std::size_t>(replicas));
  std::vector<char> survived(static_cast<std::size_t>(replicas), 0);
  parallel_for(sq.size(), [&](std::size_t r) {
    NoiseStream ns(seed, static_cast<std::uint64_t>(r));
    survived[r] = coupled_replica_sq(s, est, norm, z0, z1, p, steps, ns, sq[r]) ? 1 : 0;
  });
  return aggregate_replicas(sq, survived, steps);
}

CoupledSgResult coupled_run_overdamped(Scheme s, const GradientEstimator& est,
                                       std::span<const double> x0,
                                       std::span<const double> y0,
                                       const IntegratorParams& p, long long steps,
                                       int replicas, std::uint64_t seed) {
  if (!is_overdamped(s))
    throw std::invalid_argument("coupled_run_overdamped: OD-EM / OD-LM only");
  validate_pair(est.dim(), x0.size(), y0.size(), steps, replicas);
  const std::size_t n = est.dim();

  std::vector<std::vector<double>> sq(static_cast<std::size_t>(replicas));
  std::vector<char> survived(static_cast<std::size_t>(replicas), 0);
  parallel_for(sq.size(), [&](std::size_t r) {
    NoiseStream ns(seed, static_cast<std::uint64_t>(r));
    IntegratorState a(PhaseState(std::vector<double>(x0.begin(), x0.end()),
                                 std::vector<double>(n, 0.0)));
    IntegratorState b(PhaseState(std::vector<double>(y0.begin(), y0.end()),
                                 std::vector<double>(n, 0.0)));
    if (s == Scheme::od_lm) {
      // Shared initial cached noise: it cancels in the difference, matching
      // OD-EM's difference dynamics exactly.
      a.noise_cache = ns.gaussian_vector(n);
      b.noise_cache = a.noise_cache;
    }
    std::vector<std::int32_t> batch;
    FixedBatchGradient grad_a(est, batch), grad_b(est, batch);

    auto dist_sq = [&] {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = a.z.x[i] - b.z.x[i];
        acc += d * d;
      }
      return acc;
    };

    auto& traj = sq[r];
    traj.assign(static_cast<std::size_t>(steps) + 1, kNaN);
    traj[0] = dist_sq();
    survived[r] = 1;
    for (long long k = 1; k <= steps; ++k) {
      batch = est.sample_batch(ns);
      const StepNoise noise = draw_step_noise(s, n, p, ns);
      try {
        step_overdamped_with_noise(s, a, grad_a, p, noise);
        step_overdamped_with_noise(s, b, grad_b, p, noise);
      } catch (const NonFiniteError&) {
        for (long long j = k; j <= steps; ++j)
          traj[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
        survived[r] = 0;
        break;
      }
      const double d2 = dist_sq();
      traj[static_cast<std::size_t>(k)] = d2;
      if (d2 > kDivergenceThreshold * kDivergenceThreshold) {
        for (long long j = k + 1; j <= steps; ++j)
          traj[static_cast<std::size_t>(j)] = std::numeric_limits<double>::infinity();
        survived[r] = 0;
        break;
      }
    }
  });
  return aggregate_replicas(sq, survived, steps);
}

double empirical_rate(std::span<const double> trajectory, std::size_t burn_in) {
  if (trajectory.size() <= burn_in + 10)
    throw std::invalid_argument("empirical_rate: need more than burn_in + 10 points");
  const std::size_t n = trajectory.size() - burn_in;
  // Least squares of log d_k on k over the window.
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = trajectory[burn_in + i];
    if (!(d > 0.0))
      throw std::runtime_error("empirical_rate: non-positive distance (chains merged)");
    const double k = static_cast<double>(i);
    const double y = std::log(d);
    sk += k;
    sy += y;
    skk += k * k;
    sky += k * y;
  }
  const double denom = n * skk - sk * sk;
  const double slope = (n * sky - sk * sy) / denom;
  return std::exp(slope);
}

}  // namespace langevin
