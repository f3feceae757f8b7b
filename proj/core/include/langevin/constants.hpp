#pragma once

#include "langevin/integrator.hpp"
#include "langevin/phase.hpp"

namespace langevin {

// Per-scheme contraction constants: the coupled difference satisfies
//   |dz_k|^2_{a,b} <= C (1 - c(h))^s |dz_0|^2_{a,b},  s = k - s_shift,
// for h < h0 and gamma >= gamma0 (gamma0 implicit for the BAOAB family,
// where h0 = (1-eta)/(alpha sqrt(M)) itself depends on gamma through eta).
struct SchemeConstants {
  Scheme scheme;
  double m, M, gamma, h;
  double a;        // 1/M
  double b;
  double c;        // per-step rate
  double C;        // preconstant (applies to squared norms)
  int s_shift;     // 0: exponent k; 1: exponent k-1
  double h0;
  double gamma0;   // NaN when implicit
  bool gamma_implicit;
  bool in_region;  // h < h0 and (gamma >= gamma0 unless implicit)

  ModifiedNorm norm() const { return ModifiedNorm(a, b); }
  // C (1-c)^(k-s_shift) * d0_sq
  double bound_sq(long long k, double d0_sq) const;
};

SchemeConstants constants_for(Scheme s, double m, double M, double gamma, double h);

// For grid construction: a sufficient friction floor making the implicit
// schemes' h0 condition hold whenever h < 1/(2 gamma) (2*alpha*sqrt(M) with
// alpha from the h0 formula).  Returns gamma0 itself for explicit schemes.
double region_gamma_floor(Scheme s, double M);

// Largest in-region stepsize at this friction: the closed-form h0 for the
// explicit schemes, 2/M for the overdamped ones (gamma ignored), and for the
// BAOAB family -- whose h0 depends on h through eta -- the nonzero fixed
// point of h = (1 - exp(-gamma h)) / (alpha sqrt(M)).  That fixed point
// exists iff gamma > alpha sqrt(M); returns 0 otherwise.
double region_h_cap(Scheme s, double M, double gamma);

// Stochastic-gradient variant with the curvature-noise penalty C_G.
struct StochasticSchemeConstants {
  SchemeConstants base;  // deterministic row at the same point
  double cg;
  double c;       // penalized rate
  double C;       // stepsize-dependent preconstant
  bool vacuous;   // c <= 0: the bound says nothing
  double bound_sq(long long k, double d0_sq) const;
};

StochasticSchemeConstants constants_for_sg(Scheme s, double m, double M,
                                           double gamma, double h, double cg);

// Overdamped rate of Prop-style contraction
//   E|x_k - y_k|^2 <= (1 - rate)^k |x_0 - y_0|^2,
// rate = h m (2 - h M) - h^2 C_G; positive at cg=0 iff h < 2/M.
double overdamped_rate(double m, double M, double h, double cg);

}  // namespace langevin
