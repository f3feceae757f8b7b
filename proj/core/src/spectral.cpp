#include "langevin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "langevin/noise.hpp"
#include "langevin/parallel.hpp"

namespace langevin {

double Mat2::frobenius() const {
  return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
}

void Mat2::scale(double s) {
  a11 *= s;
  a12 *= s;
  a21 *= s;
  a22 *= s;
}

double max_eig_modulus(const Mat2& p) {
  const double tr = p.a11 + p.a22;
  const double det = p.a11 * p.a22 - p.a12 * p.a21;
  const double disc = 0.25 * tr * tr - det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::abs(0.5 * tr + s), std::abs(0.5 * tr - s));
  }
  // Complex pair: |eig|^2 = det, and det > tr^2/4 >= 0 here.
  return std::sqrt(det);
}

namespace {

// Sub-step maps on the coupled difference (dx, dv); Gaussian noise is shared
// between the chains and drops out.
Mat2 kick(double tau, double lambda) {  // v -= tau * lambda * x
  return {1.0, 0.0, -tau * lambda, 1.0};
}
Mat2 drift(double tau) {  // x += tau * v
  return {1.0, tau, 0.0, 1.0};
}
Mat2 ou(double decay) {  // v *= decay
  return {1.0, 0.0, 0.0, decay};
}
Mat2 stochastic_kick(double decay, double one_m_decay, double lambda, double gamma) {
  // v = decay * v - (one_m_decay / gamma) * lambda * x
  return {1.0, 0.0, -one_m_decay * lambda / gamma, decay};
}

}  // namespace

Mat2 mode_matrix(Scheme s, double lambda, const IntegratorParams& p) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("mode_matrix: curvature must be positive and finite");
  const double h = p.h;
  const double g = p.gamma;
  Mat2 m;  // identity
  auto apply = [&m](const Mat2& step) { m = step * m; };

  switch (s) {
    case Scheme::em:
      // x += h v;  v += -h lambda x_old - gamma h v_old  (both at old state)
      return {1.0, h, -h * lambda, 1.0 - g * h};
    case Scheme::bbk: {
      const double d = 1.0 + 0.5 * g * h;
      apply({1.0, 0.0, -0.5 * h * lambda, 1.0 - 0.5 * g * h});
      apply(drift(h));
      apply({1.0, 0.0, -0.5 * h * lambda / d, 1.0 / d});
      return m;
    }
    case Scheme::spv:
      apply(drift(0.5 * h));
      apply(stochastic_kick(p.eta, p.one_m_eta, lambda, g));
      apply(drift(0.5 * h));
      return m;
    case Scheme::svv:
      apply(stochastic_kick(p.eta_half, p.one_m_eta_half, lambda, g));
      apply(drift(h));
      apply(stochastic_kick(p.eta_half, p.one_m_eta_half, lambda, g));
      return m;
    case Scheme::baoab:
      apply(kick(0.5 * h, lambda));
      apply(drift(0.5 * h));
      apply(ou(p.eta));
      apply(drift(0.5 * h));
      apply(kick(0.5 * h, lambda));
      return m;
    case Scheme::obabo:
      apply(ou(p.eta_half));
      apply(kick(0.5 * h, lambda));
      apply(drift(h));
      apply(kick(0.5 * h, lambda));
      apply(ou(p.eta_half));
      return m;
    case Scheme::ses: {
      const double w = p.one_m_eta / g;
      const double d2 = (g * h - p.one_m_eta) / (g * g);
      return {1.0 - lambda * d2, w, -lambda * w, p.eta};
    }
    case Scheme::roabao:
      throw std::invalid_argument(
          "mode_matrix: rOABAO's map depends on the midpoint draw; use "
          "mode_matrix_roabao");
    case Scheme::od_em:
    case Scheme::od_lm:
      throw std::invalid_argument(
          "mode_matrix: overdamped schemes contract scalar position "
          "differences; use mode_factor_overdamped");
  }
  throw std::invalid_argument("mode_matrix: unknown scheme");
}

Mat2 mode_matrix_roabao(double lambda, const IntegratorParams& p, double u) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("mode_matrix_roabao: curvature must be positive and finite");
  if (!(u >= 0.0) || !(u <= p.h))
    throw std::invalid_argument("mode_matrix_roabao: midpoint draw outside [0, h]");
  const double h = p.h;
  const double rh = p.eta_half;  // sqrt(eta)
  const double hh2 = 0.5 * h * h * lambda;
  return {1.0 - hh2, rh * (h - hh2 * u), -rh * h * lambda, p.eta * (1.0 - h * lambda * u)};
}

double mode_factor_overdamped(double lambda, double h) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("mode_factor_overdamped: curvature must be positive and finite");
  return 1.0 - h * lambda;
}

double mode_modulus(Scheme s, double lambda, const IntegratorParams& p) {
  if (is_overdamped(s)) return std::abs(mode_factor_overdamped(lambda, p.h));
  return max_eig_modulus(mode_matrix(s, lambda, p));
}

SpectralGap spectral_gap(Scheme s, double m, double M, const IntegratorParams& p) {
  if (!(0.0 < m) || !(m <= M) || !std::isfinite(M))
    throw std::invalid_argument("spectral_gap: need 0 < m <= M finite");
  if (s == Scheme::roabao)
    throw std::invalid_argument(
        "spectral_gap: rOABAO's one-step map is random; use lyapunov_rate_roabao");
  const double rho = std::max(mode_modulus(s, m, p), mode_modulus(s, M, p));
  return {1.0 - rho, rho, rho >= 1.0};
}

double continuous_rate(double m, double M, double gamma) {
  if (!(0.0 < m) || !(m <= M) || !std::isfinite(M))
    throw std::invalid_argument("continuous_rate: need 0 < m <= M finite");
  if (!(gamma > 0.0)) throw std::invalid_argument("continuous_rate: need gamma > 0");
  auto decay = [gamma](double lam) {
    const double disc = gamma * gamma - 4.0 * lam;
    if (disc >= 0.0) return 0.5 * (gamma - std::sqrt(disc));
    return 0.5 * gamma;
  };
  return std::min(decay(m), decay(M));
}

LyapunovEstimate lyapunov_rate_roabao(double m, double M, const IntegratorParams& p,
                                      long long n_products, int replicas,
                                      std::uint64_t seed, double forced_u) {
  if (!(0.0 < m) || !(m <= M) || !std::isfinite(M))
    throw std::invalid_argument("lyapunov_rate_roabao: need 0 < m <= M finite");
  if (n_products < 1) throw std::invalid_argument("lyapunov_rate_roabao: need n_products >= 1");
  if (replicas < 1) throw std::invalid_argument("lyapunov_rate_roabao: need replicas >= 1");
  if (forced_u >= 0.0 && forced_u > p.h)
    throw std::invalid_argument("lyapunov_rate_roabao: forced midpoint outside [0, h]");

  const double modes[2] = {m, M};
  std::vector<double> rates(static_cast<std::size_t>(replicas));

  parallel_for(rates.size(), [&](std::size_t r) {
    double worst = 0.0;
    for (int mi = 0; mi < 2; ++mi) {
      NoiseStream ns(seed, 2 * static_cast<std::uint64_t>(r) + static_cast<std::uint64_t>(mi));
      Mat2 prod;  // identity
      double log_acc = 0.0;
      for (long long i = 0; i < n_products; ++i) {
        const double u = forced_u >= 0.0 ? forced_u : ns.uniform(0.0, p.h);
        prod = mode_matrix_roabao(modes[mi], p, u) * prod;
        if ((i + 1) % 32 == 0) {
          const double sc = prod.frobenius();
          if (!(sc > 0.0) || !std::isfinite(sc))
            throw std::runtime_error(
                "lyapunov_rate_roabao: product norm degenerate despite renormalization");
          log_acc += std::log(sc);
          prod.scale(1.0 / sc);
        }
      }
      const double tail = prod.frobenius();
      if (!(tail > 0.0) || !std::isfinite(tail))
        throw std::runtime_error(
            "lyapunov_rate_roabao: product norm degenerate despite renormalization");
      log_acc += std::log(tail);
      worst = std::max(worst, std::exp(log_acc / static_cast<double>(n_products)));
    }
    rates[r] = worst;
  });

  double mean = 0.0;
  for (double v : rates) mean += v;
  mean /= static_cast<double>(replicas);
  double ci = 0.0;
  if (replicas >= 2) {
    double ss = 0.0;
    for (double v : rates) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(replicas - 1));
    ci = 1.96 * sd / std::sqrt(static_cast<double>(replicas));
  }
  return {mean, ci, replicas};
}

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(0.0 < lo) || !(lo <= hi) || !std::isfinite(hi))
    throw std::invalid_argument("contour_grid: axis range must satisfy 0 < lo <= hi");
  if (n < 1) throw std::invalid_argument("contour_grid: need at least one point per axis");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

ContourGrid contour_grid(Scheme s, double m, double M, double gamma_min,
                         double gamma_max, double h_min, double h_max,
                         const ContourOptions& opts) {
  if (is_overdamped(s))
    throw std::invalid_argument("contour_grid: overdamped schemes have no friction axis");
  if (!(0.0 < m) || !(m <= M) || !std::isfinite(M))
    throw std::invalid_argument("contour_grid: need 0 < m <= M finite");

  ContourGrid grid;
  grid.gammas = log_spaced(gamma_min, gamma_max, opts.gamma_points);
  grid.hs = log_spaced(h_min, h_max, opts.h_points);
  grid.cells.resize(grid.gammas.size() * grid.hs.size());

  auto fill_cell = [&](std::size_t idx) {
    const std::size_t gi = idx / grid.hs.size();
    const std::size_t hj = idx % grid.hs.size();
    const double gamma = grid.gammas[gi];
    const double h = grid.hs[hj];
    const auto params = IntegratorParams::kinetic(h, gamma);
    ContourCell cell{gamma, h, 0.0, false, 0.0};
    if (s == Scheme::roabao) {
      const auto est = lyapunov_rate_roabao(m, M, params, opts.lyapunov_products,
                                            opts.lyapunov_replicas, opts.seed);
      cell.value = std::log(est.rate / h);
      cell.divergent = est.rate >= 1.0;
      cell.ci = est.ci_half_width;
    } else {
      const auto sg = spectral_gap(s, m, M, params);
      cell.value = std::log(sg.max_modulus / h);
      cell.divergent = sg.divergent;
    }
    grid.cells[idx] = cell;
  };

  if (s == Scheme::roabao) {
    // Replica-level parallelism lives inside the Lyapunov estimator; keep the
    // cell loop serial to avoid nested pools.
    for (std::size_t i = 0; i < grid.cells.size(); ++i) fill_cell(i);
  } else {
    parallel_for(grid.cells.size(), fill_cell);
  }
  return grid;
}

}  // namespace langevin
