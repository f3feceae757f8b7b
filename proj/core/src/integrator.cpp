#include "langevin/integrator.hpp"

#include <cmath>
#include <stdexcept>

namespace langevin {

bool is_kinetic(Scheme s) { return !is_overdamped(s); }

bool is_overdamped(Scheme s) { return s == Scheme::od_em || s == Scheme::od_lm; }

bool reuses_gradient(Scheme s) {
  return s == Scheme::baoab || s == Scheme::obabo || s == Scheme::bbk ||
         s == Scheme::svv;
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::em: return "em";
    case Scheme::bbk: return "bbk";
    case Scheme::spv: return "spv";
    case Scheme::svv: return "svv";
    case Scheme::baoab: return "baoab";
    case Scheme::obabo: return "obabo";
    case Scheme::roabao: return "roabao";
    case Scheme::ses: return "ses";
    case Scheme::od_em: return "od-em";
    case Scheme::od_lm: return "od-lm";
  }
  return "?";
}

Scheme parse_scheme(const std::string& tag) {
  for (Scheme s : kKineticSchemes)
    if (tag == to_string(s)) return s;
  if (tag == "od-em") return Scheme::od_em;
  if (tag == "od-lm") return Scheme::od_lm;
  throw std::invalid_argument(
      "unknown scheme '" + tag +
      "' (valid: em, bbk, spv, svv, baoab, obabo, roabao, ses, od-em, od-lm)");
}

double eta(double gamma, double h) {
  if (!(gamma > 0.0) || !(h > 0.0))
    throw std::invalid_argument("eta: gamma and h must be positive");
  return std::exp(-gamma * h);
}

double one_minus_eta(double gamma, double h) {
  if (!(gamma > 0.0) || !(h > 0.0))
    throw std::invalid_argument("one_minus_eta: gamma and h must be positive");
  return -std::expm1(-gamma * h);
}

IntegratorParams IntegratorParams::kinetic(double h, double gamma) {
  if (!(h > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("IntegratorParams: h and gamma must be positive");
  IntegratorParams p;
  p.h = h;
  p.gamma = gamma;
  p.eta = std::exp(-gamma * h);
  p.one_m_eta = -std::expm1(-gamma * h);
  p.eta_half = std::exp(-0.5 * gamma * h);  // recomputed, not sqrt(eta)
  p.one_m_eta_half = -std::expm1(-0.5 * gamma * h);
  return p;
}

IntegratorParams IntegratorParams::kinetic_with_eta(double h, double gamma,
                                                    double eta_value) {
  if (!(h > 0.0))
    throw std::invalid_argument("IntegratorParams: h must be positive");
  if (!(eta_value >= 0.0 && eta_value < 1.0))
    throw std::invalid_argument("IntegratorParams: eta must be in [0,1)");
  IntegratorParams p;
  p.h = h;
  p.gamma = gamma;
  p.eta = eta_value;
  p.one_m_eta = 1.0 - eta_value;
  p.eta_half = std::sqrt(eta_value);
  p.one_m_eta_half = 1.0 - p.eta_half;
  return p;
}

IntegratorParams IntegratorParams::overdamped(double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("IntegratorParams: h must be positive");
  IntegratorParams p;
  p.h = h;
  return p;
}

SesCovariance ses_covariance(double gamma, double h) {
  if (!(gamma > 0.0) || !(h > 0.0))
    throw std::invalid_argument("ses_covariance: gamma and h must be positive");
  const double t = gamma * h;
  const double w = -std::expm1(-t);  // 1 - eta
  const double e = std::exp(-t);
  // 2t - (3 - 4 eta + eta^2) rewritten as 2(t - w) - w^2; w is exact to
  // rounding so the cancellation between t and w stays benign much longer
  // than the naive form.
  const double f = 2.0 * (t - w) - w * w;
  SesCovariance c;
  c.s1 = f / (gamma * gamma);
  c.s2 = w * w / gamma;
  c.s3 = (1.0 - e) * (1.0 + e);

  auto clamped = [](double x, const char* what) {
    if (x >= 0.0) return x;
    if (x >= -1e-14) return 0.0;
    throw std::runtime_error(std::string("ses_covariance: ") + what +
                             " negative beyond guard");
  };
  double p1 = clamped(c.s1, "S1 pivot");
  c.l11 = std::sqrt(p1);
  c.l21 = c.l11 > 0.0 ? c.s2 / c.l11 : 0.0;
  double p2 = clamped(c.s3 - c.l21 * c.l21, "S3 pivot");
  c.l22 = std::sqrt(p2);
  return c;
}

int gaussian_vectors_per_step(Scheme s) {
  switch (s) {
    case Scheme::em:
    case Scheme::baoab:
    case Scheme::spv:
    case Scheme::bbk:  // fresh closing xi only; the opening xi is cached
    case Scheme::od_em:
    case Scheme::od_lm:
      return 1;
    case Scheme::obabo:
    case Scheme::svv:
    case Scheme::ses:
    case Scheme::roabao:
      return 2;
  }
  return 0;
}

bool uses_midpoint_uniform(Scheme s) { return s == Scheme::roabao; }

StepNoise draw_step_noise(Scheme s, std::size_t n, const IntegratorParams& p,
                          NoiseStream& ns) {
  StepNoise noise;
  noise.g1.resize(n);
  ns.fill_gaussian(noise.g1);
  if (gaussian_vectors_per_step(s) == 2) {
    noise.g2.resize(n);
    ns.fill_gaussian(noise.g2);
  }
  if (uses_midpoint_uniform(s)) noise.u = ns.uniform(0.0, p.h);
  return noise;
}

StepNoise zero_step_noise(Scheme s, std::size_t n, const IntegratorParams& p,
                          double u_override) {
  StepNoise noise;
  noise.g1.assign(n, 0.0);
  if (gaussian_vectors_per_step(s) == 2) noise.g2.assign(n, 0.0);
  if (uses_midpoint_uniform(s))
    noise.u = u_override >= 0.0 ? u_override : 0.5 * p.h;
  return noise;
}

namespace {

bool same_site(const std::vector<double>& site, const std::vector<double>& x) {
  if (site.size() != x.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (site[i] != x[i]) return false;
  return true;
}

// Force at the current position for a reuse scheme's opening sub-step: taken
// from the cache when it already holds this site, otherwise evaluated fresh
// (the extra evaluation happens once, right after initialization).
const std::vector<double>& opening_force(IntegratorState& st, GradientSource& grad) {
  if (!st.has_grad_cache() || !same_site(st.grad_site, st.z.x)) {
    st.grad_cache.resize(st.z.dim());
    grad.eval(st.z.x, st.grad_cache);
    st.grad_site = st.z.x;
  }
  return st.grad_cache;
}

void closing_force(IntegratorState& st, GradientSource& grad,
                   std::vector<double>& g_out) {
  g_out.resize(st.z.dim());
  grad.eval(st.z.x, g_out);
  st.grad_cache = g_out;
  st.grad_site = st.z.x;
}

void check_finite(const IntegratorState& st, Scheme s) {
  if (!st.z.finite())
    throw NonFiniteError(std::string("step: non-finite state after ") +
                         to_string(s));
}

}  // namespace

void step_with_noise(Scheme s, IntegratorState& state, GradientSource& grad,
                     const IntegratorParams& p, const StepNoise& noise) {
  if (is_overdamped(s))
    throw std::invalid_argument("step: overdamped scheme, use step_overdamped");
  const std::size_t n = state.z.dim();
  if (noise.g1.size() != n)
    throw std::invalid_argument("step: noise dimension mismatch");
  auto& x = state.z.x;
  auto& v = state.z.v;
  const double h = p.h;
  std::vector<double> g(n);

  switch (s) {
    case Scheme::em: {
      grad.eval(x, g);
      const double coef = std::sqrt(2.0 * p.gamma * h);
      for (std::size_t i = 0; i < n; ++i) {
        double vi = v[i];
        x[i] += h * vi;
        v[i] = vi - h * g[i] - h * p.gamma * vi + coef * noise.g1[i];
      }
      break;
    }

    case Scheme::bbk: {
      // The closing half-kick's xi is the opening half-kick's xi of the next
      // step (the step-k update reads xi_k and xi_{k+1}), so the opening
      // noise comes from the cache and only one fresh vector is consumed.
      // Resampling it instead would halve the stationary velocity variance.
      if (!state.has_noise_cache())
        throw std::logic_error("step: BBK noise cache not primed");
      const auto& g0 = opening_force(state, grad);
      const double coef = 0.5 * std::sqrt(2.0 * p.gamma * h);
      const double d = 1.0 + 0.5 * p.gamma * h;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = (1.0 - 0.5 * p.gamma * h) * v[i] - 0.5 * h * g0[i] +
               coef * state.noise_cache[i];
        x[i] += h * v[i];
      }
      closing_force(state, grad, g);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = (v[i] - 0.5 * h * g[i] + coef * noise.g1[i]) / d;
      state.noise_cache = noise.g1;
      break;
    }

    case Scheme::spv: {
      for (std::size_t i = 0; i < n; ++i) x[i] += 0.5 * h * v[i];
      grad.eval(x, g);
      const double w = p.one_m_eta / p.gamma;
      const double coef = std::sqrt(p.one_m_eta * (1.0 + p.eta));
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = p.eta * v[i] - w * g[i] + coef * noise.g1[i];
        x[i] += 0.5 * h * v[i];
      }
      break;
    }

    case Scheme::svv: {
      const auto& g0 = opening_force(state, grad);
      const double w = p.one_m_eta_half / p.gamma;
      const double coef = std::sqrt(p.one_m_eta);  // 1 - eta_half^2 = 1 - eta
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = p.eta_half * v[i] - w * g0[i] + coef * noise.g1[i];
        x[i] += h * v[i];
      }
      closing_force(state, grad, g);
      for (std::size_t i = 0; i < n; ++i)
        v[i] = p.eta_half * v[i] - w * g[i] + coef * noise.g2[i];
      break;
    }

    case Scheme::baoab: {
      const auto& g0 = opening_force(state, grad);
      const double coef = std::sqrt(p.one_m_eta * (1.0 + p.eta));
      for (std::size_t i = 0; i < n; ++i) {
        v[i] -= 0.5 * h * g0[i];
        x[i] += 0.5 * h * v[i];
        v[i] = p.eta * v[i] + coef * noise.g1[i];
        x[i] += 0.5 * h * v[i];
      }
      closing_force(state, grad, g);
      for (std::size_t i = 0; i < n; ++i) v[i] -= 0.5 * h * g[i];
      break;
    }

    case Scheme::obabo: {
      const auto& g0 = opening_force(state, grad);
      const double coef = std::sqrt(p.one_m_eta);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = p.eta_half * v[i] + coef * noise.g1[i];
        v[i] -= 0.5 * h * g0[i];
        x[i] += h * v[i];
      }
      closing_force(state, grad, g);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] -= 0.5 * h * g[i];
        v[i] = p.eta_half * v[i] + coef * noise.g2[i];
      }
      break;
    }

    case Scheme::roabao: {
      if (!(noise.u >= 0.0 && noise.u <= p.h))
        throw std::invalid_argument("step: rOABAO midpoint outside [0,h]");
      const double coef = std::sqrt(p.one_m_eta);
      std::vector<double> xm(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = p.eta_half * v[i] + coef * noise.g1[i];
        xm[i] = x[i] + noise.u * v[i];
      }
      grad.eval(xm, g);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += h * v[i] - 0.5 * h * h * g[i];
        v[i] -= h * g[i];
        v[i] = p.eta_half * v[i] + coef * noise.g2[i];
      }
      break;
    }

    case Scheme::ses: {
      grad.eval(x, g);
      const SesCovariance c = ses_covariance(p.gamma, p.h);
      const double w = p.one_m_eta / p.gamma;
      const double d2 = (p.gamma * h - p.one_m_eta) / (p.gamma * p.gamma);
      for (std::size_t i = 0; i < n; ++i) {
        double zeta = c.l11 * noise.g1[i];
        double omega = c.l21 * noise.g1[i] + c.l22 * noise.g2[i];
        double vi = v[i];
        x[i] += w * vi - d2 * g[i] + zeta;
        v[i] = p.eta * vi - w * g[i] + omega;
      }
      break;
    }

    default:
      throw std::invalid_argument("step: unhandled scheme");
  }
  check_finite(state, s);
}

void step(Scheme s, IntegratorState& state, GradientSource& grad,
          const IntegratorParams& p, NoiseStream& ns) {
  if (s == Scheme::bbk && !state.has_noise_cache())
    state.noise_cache = ns.gaussian_vector(state.z.dim());
  StepNoise noise = draw_step_noise(s, state.z.dim(), p, ns);
  step_with_noise(s, state, grad, p, noise);
}

void step_overdamped_with_noise(Scheme s, IntegratorState& state,
                                GradientSource& grad, const IntegratorParams& p,
                                const StepNoise& noise) {
  if (!is_overdamped(s))
    throw std::invalid_argument("step_overdamped: kinetic scheme, use step");
  const std::size_t n = state.z.x.size();
  if (noise.g1.size() != n)
    throw std::invalid_argument("step_overdamped: noise dimension mismatch");
  auto& x = state.z.x;
  std::vector<double> g(n);
  grad.eval(x, g);
  const double coef = std::sqrt(2.0 * p.h);
  if (s == Scheme::od_em) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] += -p.h * g[i] + coef * noise.g1[i];
  } else {
    if (!state.has_noise_cache())
      throw std::logic_error("step_overdamped: OD-LM noise cache not primed");
    for (std::size_t i = 0; i < n; ++i)
      x[i] += -p.h * g[i] + coef * 0.5 * (noise.g1[i] + state.noise_cache[i]);
    state.noise_cache = noise.g1;
  }
  for (double xi : x)
    if (!std::isfinite(xi))
      throw NonFiniteError(std::string("step_overdamped: non-finite state after ") +
                           to_string(s));
}

void step_overdamped(Scheme s, IntegratorState& state, GradientSource& grad,
                     const IntegratorParams& p, NoiseStream& ns) {
  const std::size_t n = state.z.x.size();
  if (s == Scheme::od_lm && !state.has_noise_cache())
    state.noise_cache = ns.gaussian_vector(n);
  StepNoise noise;
  noise.g1 = ns.gaussian_vector(n);
  step_overdamped_with_noise(s, state, grad, p, noise);
}

GlcReport glc_limit_check(Scheme s, double h, double tolerance, int steps,
                          std::uint64_t seed) {
  if (s != Scheme::baoab && s != Scheme::obabo && s != Scheme::roabao)
    throw std::invalid_argument(
        std::string("glc_limit_check: ") + to_string(s) +
        " is not GLC (its gamma->infinity limit at fixed h is not a consistent "
        "overdamped integrator); only baoab, obabo, roabao qualify");
  if (!(h > 0.0)) throw std::invalid_argument("glc_limit_check: h must be positive");

  DiagonalGaussian target({1.0, 10.0});
  const std::size_t n = target.dim();
  NoiseStream ns(seed, 0);

  // gamma -> infinity realized exactly: eta = 0.  The placeholder gamma is
  // never read by these kernels.
  IntegratorParams kin = IntegratorParams::kinetic_with_eta(h, 1.0, 0.0);
  IntegratorParams od = IntegratorParams::overdamped(0.5 * h * h);

  std::vector<double> x0(n);
  for (double& xi : x0) xi = ns.gaussian();

  IntegratorState kst;
  kst.z = PhaseState(x0, std::vector<double>(n, 0.0));
  IntegratorState ost;
  ost.z.x = x0;

  PotentialGradient kgrad(target), ograd(target);
  GlcReport rep{s, h, 0.0, false};

  if (s == Scheme::baoab) {
    // Matching the limit map needs v0 = xi0 - (h/2) grad U(x0) with xi0 also
    // seeding OD-LM's two-noise average.
    std::vector<double> xi0 = ns.gaussian_vector(n);
    std::vector<double> g0 = target.gradient_at(x0);
    for (std::size_t i = 0; i < n; ++i) kst.z.v[i] = xi0[i] - 0.5 * h * g0[i];
    ost.noise_cache = xi0;
    for (int k = 0; k < steps; ++k) {
      StepNoise noise = draw_step_noise(s, n, kin, ns);
      step_with_noise(s, kst, kgrad, kin, noise);
      step_overdamped_with_noise(Scheme::od_lm, ost, ograd, od, noise);
      for (std::size_t i = 0; i < n; ++i)
        rep.max_deviation =
            std::max(rep.max_deviation, std::abs(kst.z.x[i] - ost.z.x[i]));
    }
  } else if (s == Scheme::obabo) {
    for (int k = 0; k < steps; ++k) {
      StepNoise noise = draw_step_noise(s, n, kin, ns);
      step_with_noise(s, kst, kgrad, kin, noise);
      // The limit consumes only the first refresh noise of each step.
      step_overdamped_with_noise(Scheme::od_em, ost, ograd, od, noise);
      for (std::size_t i = 0; i < n; ++i)
        rep.max_deviation =
            std::max(rep.max_deviation, std::abs(kst.z.x[i] - ost.z.x[i]));
    }
  } else {
    // x' = x - (h^2/2) grad U(x + u xi) + h xi, sharing (xi, u) with the
    // kinetic chain's first refresh noise and midpoint draw.
    std::vector<double> xm(n), g(n);
    for (int k = 0; k < steps; ++k) {
      StepNoise noise = draw_step_noise(s, n, kin, ns);
      step_with_noise(s, kst, kgrad, kin, noise);
      for (std::size_t i = 0; i < n; ++i)
        xm[i] = ost.z.x[i] + noise.u * noise.g1[i];
      target.gradient(xm, g);
      for (std::size_t i = 0; i < n; ++i)
        ost.z.x[i] += -0.5 * h * h * g[i] + h * noise.g1[i];
      for (std::size_t i = 0; i < n; ++i)
        rep.max_deviation =
            std::max(rep.max_deviation, std::abs(kst.z.x[i] - ost.z.x[i]));
    }
  }
  rep.pass = rep.max_deviation < tolerance;
  return rep;
}

}  // namespace langevin
