#pragma once

#include <cstdint>
#include <vector>

#include "langevin/integrator.hpp"

namespace langevin {

struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  friend Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
            l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
  }
  double frobenius() const;
  void scale(double s);
};

// Largest eigenvalue modulus via the closed-form 2x2 quadratic.
double max_eig_modulus(const Mat2& p);

// One-step map of the coupled difference (dx, dv) on a quadratic mode with
// curvature lambda (noise cancels under synchronous coupling).  rOABAO's map
// additionally depends on the midpoint draw u.
Mat2 mode_matrix(Scheme s, double lambda, const IntegratorParams& p);
Mat2 mode_matrix_roabao(double lambda, const IntegratorParams& p, double u);

// Overdamped difference maps are scalar.
double mode_factor_overdamped(double lambda, double h);

// Largest eigenvalue modulus of the chosen mode matrix; the quantity whose
// max over modes {m, M} defines the gap.
double mode_modulus(Scheme s, double lambda, const IntegratorParams& p);

struct SpectralGap {
  double gap;          // 1 - max modulus
  double max_modulus;
  bool divergent;      // max modulus >= 1
};

// Exact gap on the diagonal Gaussian with curvature range [m, M]; the
// extreme modes decide it.  Not defined for rOABAO (random map; use the
// Lyapunov estimator).
SpectralGap spectral_gap(Scheme s, double m, double M, const IntegratorParams& p);

// Decay rate of the continuous dynamics dz = [[0,1],[-lambda,-gamma]] z dt,
// minimized over the extreme modes: the h->0 limit of gap/h.
double continuous_rate(double m, double M, double gamma);

// Furstenberg-type estimate for rOABAO: per mode, exp(log |P_1...P_N| / N)
// over i.i.d. midpoint draws, with norm renormalization every 32 factors;
// overall rate = max over the two modes, CI across replicas.
struct LyapunovEstimate {
  double rate;            // mean over replicas of the max-over-modes rate
  double ci_half_width;   // 1.96 * SE over replicas
  int replicas;
};

LyapunovEstimate lyapunov_rate_roabao(double m, double M, const IntegratorParams& p,
                                      long long n_products, int replicas,
                                      std::uint64_t seed,
                                      double forced_u = -1.0);

struct ContourCell {
  double gamma, h;
  double value;      // ln(rho / h) where rho = 1 - gap
  bool divergent;
  double ci;         // Lyapunov CI half width (0 for exact schemes)
};

struct ContourGrid {
  std::vector<double> gammas;  // log-spaced
  std::vector<double> hs;      // log-spaced
  std::vector<ContourCell> cells;  // row-major over (gamma, h)
};

struct ContourOptions {
  int gamma_points = 20;
  int h_points = 20;
  long long lyapunov_products = 10000;  // rOABAO only
  int lyapunov_replicas = 8;
  std::uint64_t seed = 0;
};

ContourGrid contour_grid(Scheme s, double m, double M, double gamma_min,
                         double gamma_max, double h_min, double h_max,
                         const ContourOptions& opts);

}  // namespace langevin
