#include "langevin/diagnostics.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "langevin/parallel.hpp"

namespace langevin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// Cholesky log-determinant of a symmetric matrix stored row-major; returns
// false when the matrix is not (numerically) positive definite.
bool log_det_spd(std::vector<double> a, std::size_t d, double& out) {
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double l = std::sqrt(diag);
    a[j * d + j] = l;
    acc += std::log(l);
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = v / l;
    }
  }
  out = 2.0 * acc;
  return true;
}

}  // namespace

double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("ess: need at least 100 samples");
  const std::size_t b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t a = n / b;
  const std::size_t used = a * b;

  const double mean = sample_mean(series.first(used));
  const double marginal = sample_var(series.first(used), mean);
  if (!(marginal > 0.0))
    throw std::invalid_argument("ess: degenerate (constant) series");

  std::vector<double> bm(a);
  for (std::size_t j = 0; j < a; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += series[j * b + i];
    bm[j] = s / static_cast<double>(b);
  }
  const double bm_mean = sample_mean(bm);
  const double long_run = static_cast<double>(b) * sample_var(bm, bm_mean);
  if (!(long_run > 0.0))
    throw std::invalid_argument("ess: degenerate (constant) series");
  return static_cast<double>(used) * marginal / long_run;
}

double ess_multivariate(std::span<const double> series, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("ess_multivariate: need dim >= 1");
  if (series.size() % dim != 0)
    throw std::invalid_argument("ess_multivariate: series length not a multiple of dim");
  const std::size_t n = series.size() / dim;
  if (n < 100) throw std::invalid_argument("ess_multivariate: need at least 100 samples");
  if (dim == 1) return ess(series);

  const std::size_t b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t a = n / b;
  const std::size_t used = a * b;
  if (a <= dim)
    throw std::invalid_argument("ess_multivariate: too few batches for the dimension");

  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < used; ++i)
    for (std::size_t k = 0; k < dim; ++k) mean[k] += series[i * dim + k];
  for (auto& v : mean) v /= static_cast<double>(used);

  std::vector<double> cov(dim * dim, 0.0);
  for (std::size_t i = 0; i < used; ++i)
    for (std::size_t r = 0; r < dim; ++r) {
      const double dr = series[i * dim + r] - mean[r];
      for (std::size_t c = r; c < dim; ++c)
        cov[r * dim + c] += dr * (series[i * dim + c] - mean[c]);
    }
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r; c < dim; ++c) {
      cov[r * dim + c] /= static_cast<double>(used - 1);
      cov[c * dim + r] = cov[r * dim + c];
    }

  std::vector<double> bm(a * dim, 0.0);
  for (std::size_t j = 0; j < a; ++j)
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t k = 0; k < dim; ++k) bm[j * dim + k] += series[(j * b + i) * dim + k];
  for (auto& v : bm) v /= static_cast<double>(b);

  std::vector<double> bm_mean(dim, 0.0);
  for (std::size_t j = 0; j < a; ++j)
    for (std::size_t k = 0; k < dim; ++k) bm_mean[k] += bm[j * dim + k];
  for (auto& v : bm_mean) v /= static_cast<double>(a);

  std::vector<double> bcov(dim * dim, 0.0);
  for (std::size_t j = 0; j < a; ++j)
    for (std::size_t r = 0; r < dim; ++r) {
      const double dr = bm[j * dim + r] - bm_mean[r];
      for (std::size_t c = r; c < dim; ++c)
        bcov[r * dim + c] += dr * (bm[j * dim + c] - bm_mean[c]);
    }
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r; c < dim; ++c) {
      bcov[r * dim + c] = bcov[r * dim + c] * static_cast<double>(b) / static_cast<double>(a - 1);
      bcov[c * dim + r] = bcov[r * dim + c];
    }

  double ld_cov, ld_bcov;
  if (!log_det_spd(cov, dim, ld_cov) || !log_det_spd(bcov, dim, ld_bcov))
    throw std::invalid_argument("ess_multivariate: degenerate covariance");
  return static_cast<double>(used) *
         std::exp((ld_cov - ld_bcov) / static_cast<double>(dim));
}

namespace {

struct ReplicaOutcome {
  double mean = kNaN;
  double ess_value = kNaN;
  long long grad_evals = 0;
  bool failed = false;
  long long failed_at = -1;
};

ReplicaOutcome run_replica(Scheme s, const Potential& pot,
                           const GradientEstimator* est, const IntegratorParams& p,
                           long long iterations, long long burn_in,
                           std::uint64_t seed, std::uint64_t stream,
                           const TestFunction& f) {
  const std::size_t n = pot.dim();
  NoiseStream ns(seed, stream);

  IntegratorState state{PhaseState(pot.minimizer(), std::vector<double>(n, 0.0))};
  if (is_kinetic(s)) state.z.v = ns.gaussian_vector(n);

  PotentialGradient exact(pot);
  std::optional<EstimatorGradient> stochastic;
  if (est != nullptr) stochastic.emplace(*est, ns);
  GradientSource& grad = est != nullptr
                             ? static_cast<GradientSource&>(*stochastic)
                             : static_cast<GradientSource&>(exact);

  ReplicaOutcome out;
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(iterations - burn_in));
  for (long long k = 1; k <= iterations; ++k) {
    try {
      if (is_kinetic(s))
        step(s, state, grad, p, ns);
      else
        step_overdamped(s, state, grad, p, ns);
    } catch (const NonFiniteError&) {
      out.failed = true;
      out.failed_at = k;
      out.grad_evals = grad.evaluations();
      return out;
    }
    if (k > burn_in) series.push_back(f(state.z.x));
  }
  out.grad_evals = grad.evaluations();
  out.mean = sample_mean(series);
  if (series.size() >= 100) {
    try {
      out.ess_value = ess(series);
    } catch (const std::invalid_argument&) {
      out.ess_value = kNaN;  // constant series (exactly stuck chain)
    }
  }
  return out;
}

}  // namespace

RunSummary run_sampler(Scheme s, const Potential& pot, const GradientEstimator* est,
                       const IntegratorParams& p, long long iterations,
                       long long burn_in, int replicas, std::uint64_t seed,
                       const TestFunction& f) {
  if (burn_in < 0 || iterations <= burn_in)
    throw std::invalid_argument("run_sampler: need iterations > burn_in >= 0");
  if (replicas < 1) throw std::invalid_argument("run_sampler: need replicas >= 1");
  if (est != nullptr && est->dim() != pot.dim())
    throw std::invalid_argument("run_sampler: estimator dimension mismatch");

  const TestFunction fn =
      f ? f : TestFunction([&pot](std::span<const double> x) { return pot.value(x); });

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ReplicaOutcome> outs(static_cast<std::size_t>(replicas));
  parallel_for(outs.size(), [&](std::size_t r) {
    outs[r] = run_replica(s, pot, est, p, iterations, burn_in, seed,
                          static_cast<std::uint64_t>(r), fn);
  });
  const auto t1 = std::chrono::steady_clock::now();

  RunSummary sum;
  sum.scheme = s;
  sum.h = p.h;
  sum.gamma = is_kinetic(s) ? p.gamma : 0.0;
  sum.grad = est != nullptr ? est->kind() : GradientKind::full;
  sum.batch = est != nullptr ? est->batch_size() : 0;
  sum.replicas = replicas;
  sum.seconds = std::chrono::duration<double>(t1 - t0).count();

  double mean_acc = 0.0, ess_acc = 0.0;
  for (const auto& o : outs) {
    sum.grad_evals += o.grad_evals;
    if (o.failed) {
      sum.failed = true;
      sum.failed_at = sum.failed_at < 0 ? o.failed_at : std::min(sum.failed_at, o.failed_at);
    }
    mean_acc += o.mean;
    ess_acc += o.ess_value;
  }
  if (sum.failed) {
    sum.mean = kNaN;
    sum.se = kNaN;
    sum.ess = kNaN;
    return sum;
  }
  sum.mean = mean_acc / replicas;
  sum.ess = ess_acc;
  if (replicas >= 2) {
    double ss = 0.0;
    for (const auto& o : outs) ss += (o.mean - sum.mean) * (o.mean - sum.mean);
    sum.se = std::sqrt(ss / (replicas - 1.0) / replicas);
  } else {
    sum.se = 0.0;
  }
  return sum;
}

BiasTable bias_table(std::span<const Scheme> schemes, const Potential& pot,
                     const GradientEstimator* est, std::span<const double> hs,
                     std::span<const double> gammas, long long iterations,
                     long long burn_in, int replicas, std::uint64_t seed,
                     std::optional<double> reference_mean, const TestFunction& f) {
  if (schemes.empty() || hs.empty() || gammas.empty())
    throw std::invalid_argument("bias_table: empty scheme or parameter list");

  BiasTable table;
  if (reference_mean.has_value()) {
    table.reference_mean = *reference_mean;
    table.reference_internal = false;
  } else {
    double h_ref = hs[0];
    for (double h : hs) h_ref = std::min(h_ref, h);
    h_ref *= 0.25;
    const auto p_ref = IntegratorParams::kinetic(h_ref, gammas[0]);
    const RunSummary ref =
        run_sampler(Scheme::baoab, pot, nullptr, p_ref, 10 * iterations,
                    10 * burn_in, replicas, seed + 1000003, f);
    if (ref.failed)
      throw std::runtime_error("bias_table: internal reference run diverged");
    table.reference_mean = ref.mean;
    table.reference_se = ref.se;
    table.reference_internal = true;
  }

  for (Scheme s : schemes)
    for (double h : hs)
      for (double gamma : gammas) {
        const IntegratorParams p = is_kinetic(s) ? IntegratorParams::kinetic(h, gamma)
                                                 : IntegratorParams::overdamped(h);
        const RunSummary r =
            run_sampler(s, pot, est, p, iterations, burn_in, replicas, seed, f);
        BiasCell cell;
        cell.scheme = s;
        cell.h = h;
        cell.gamma = is_kinetic(s) ? gamma : 0.0;
        cell.grad = r.grad;
        cell.batch = r.batch;
        cell.grad_evals = r.grad_evals;
        if (r.failed) {
          cell.ok = false;
          cell.bias = kNaN;
          cell.se = kNaN;
          cell.ess = kNaN;
        } else {
          cell.ok = true;
          cell.bias = r.mean - table.reference_mean;
          cell.se = r.se;
          cell.ess = r.ess;
        }
        table.cells.push_back(cell);
      }
  return table;
}

}  // namespace langevin
