#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "langevin/noise.hpp"
#include "langevin/phase.hpp"
#include "langevin/potential.hpp"

namespace langevin {

enum class Scheme {
  em,
  bbk,
  spv,
  svv,
  baoab,
  obabo,
  roabao,
  ses,
  od_em,
  od_lm,
};

constexpr std::array<Scheme, 8> kKineticSchemes = {
    Scheme::em,   Scheme::bbk,   Scheme::spv,    Scheme::svv,
    Scheme::baoab, Scheme::obabo, Scheme::roabao, Scheme::ses};

bool is_kinetic(Scheme s);
bool is_overdamped(Scheme s);
// True when the closing force evaluation is reused as the next step's opening
// force (BAOAB, OBABO, BBK, SVV): a K-step run costs K+1 evaluations instead
// of K.
bool reuses_gradient(Scheme s);
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& tag);

double eta(double gamma, double h);            // exp(-gamma h)
double one_minus_eta(double gamma, double h);  // -expm1(-gamma h), stable for small gamma h

struct IntegratorParams {
  double h = 0.0;
  double gamma = 0.0;
  // Damping factors. For kinetic params these are exp(-gamma h) and
  // exp(-gamma h / 2) with stable 1-eta companions; the overdamped-limit
  // checks override eta to exactly 0.
  double eta = 1.0;
  double one_m_eta = 0.0;
  double eta_half = 1.0;
  double one_m_eta_half = 0.0;

  static IntegratorParams kinetic(double h, double gamma);
  static IntegratorParams kinetic_with_eta(double h, double gamma, double eta_value);
  static IntegratorParams overdamped(double h);
};

// Covariance of the exact one-step (position, velocity) noise pair of SES:
//   S1 = (2h - (3 - 4 eta + eta^2)/gamma)/gamma,  S2 = (1-eta)^2/gamma,
//   S3 = 1 - eta^2,
// with its lower Cholesky factor.  Tiny negative diagonal pivots from
// cancellation at gamma*h -> 0 are clamped to zero down to -1e-14; anything
// below that signals a transcription bug and throws.
struct SesCovariance {
  double s1, s2, s3;
  double l11, l21, l22;
};

SesCovariance ses_covariance(double gamma, double h);

// Per-step noise bundle.  Draw order from the stream is fixed: g1 (n
// Gaussians), then g2 if the scheme uses it, then the uniform u for rOABAO.
// SES stores two standard normal vectors; the kernel applies the Cholesky
// factor of ses_covariance.  BBK's g1 is the closing half-kick's xi; its
// opening half-kick reads the previous step's closing xi from the state's
// noise cache.
struct StepNoise {
  std::vector<double> g1;
  std::vector<double> g2;
  double u = 0.0;  // rOABAO midpoint offset, in (0,h)
};

// Fresh Gaussian vectors consumed per step: EM/BAOAB/SPV/BBK/OD-EM/OD-LM: 1;
// OBABO/SVV/SES: 2 (SES uses them as one correlated pair).  BBK and OD-LM
// additionally consume one vector when their noise cache is first primed.
int gaussian_vectors_per_step(Scheme s);
bool uses_midpoint_uniform(Scheme s);

StepNoise draw_step_noise(Scheme s, std::size_t n, const IntegratorParams& p,
                          NoiseStream& ns);
// Zero Gaussians; u defaults to h/2 unless overridden (rOABAO determinism
// tests want a chosen midpoint).
StepNoise zero_step_noise(Scheme s, std::size_t n, const IntegratorParams& p,
                          double u_override = -1.0);

// Thrown when a step leaves the state non-finite (overflowed trajectory).
// Coupled-run drivers catch this and record divergence as data.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegratorState {
  PhaseState z;
  // Force shared between consecutive steps of the reuse schemes; valid only
  // while grad_site equals the current position.
  std::vector<double> grad_cache;
  std::vector<double> grad_site;
  // Previous-step noise vector carried across steps (OD-LM's averaged pair,
  // BBK's shared boundary xi).  step() primes it from the stream; explicit
  // noise callers must prime it themselves.
  std::vector<double> noise_cache;

  IntegratorState() = default;
  explicit IntegratorState(PhaseState z0) : z(std::move(z0)) {}
  bool has_grad_cache() const { return !grad_cache.empty(); }
  bool has_noise_cache() const { return !noise_cache.empty(); }
};

// One step of a kinetic scheme with an explicit noise bundle.
void step_with_noise(Scheme s, IntegratorState& state, GradientSource& grad,
                     const IntegratorParams& p, const StepNoise& noise);

// One step of a kinetic scheme, drawing its noise from the stream.
void step(Scheme s, IntegratorState& state, GradientSource& grad,
          const IntegratorParams& p, NoiseStream& ns);

// Overdamped steps x' = x - h grad U(x) + sqrt(2h) * (noise term).
// OD-EM uses the fresh Gaussian; OD-LM averages it with the previous step's
// (cached) one.  The stream flavor of OD-LM draws its initial cached noise on
// first use; the bundle flavor requires the cache to be primed.
void step_overdamped_with_noise(Scheme s, IntegratorState& state,
                                GradientSource& grad, const IntegratorParams& p,
                                const StepNoise& noise);
void step_overdamped(Scheme s, IntegratorState& state, GradientSource& grad,
                     const IntegratorParams& p, NoiseStream& ns);

// Matches the gamma -> infinity limit (eta forced to 0) of BAOAB / OBABO /
// rOABAO against its overdamped limit map with stepsize h^2/2 on matched
// noise, over `steps` steps of the 2D Gaussian (m=1, M=10).  BBK/SPV/SVV have
// no such limit and throw.
struct GlcReport {
  Scheme scheme;
  double h;
  double max_deviation;
  bool pass;
};

GlcReport glc_limit_check(Scheme s, double h, double tolerance, int steps = 100,
                          std::uint64_t seed = 0);

}  // namespace langevin
