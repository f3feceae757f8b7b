#include "langevin/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace langevin {

double SchemeConstants::bound_sq(long long k, double d0_sq) const {
  return C * std::pow(1.0 - c, static_cast<double>(k - s_shift)) * d0_sq;
}

double StochasticSchemeConstants::bound_sq(long long k, double d0_sq) const {
  return C * std::pow(1.0 - c, static_cast<double>(k - base.s_shift)) * d0_sq;
}

SchemeConstants constants_for(Scheme s, double m, double M, double gamma,
                              double h) {
  if (!(m > 0.0) || !(M >= m))
    throw std::invalid_argument("constants_for: need 0 < m <= M");
  if (!(gamma > 0.0) || !(h > 0.0))
    throw std::invalid_argument("constants_for: gamma and h must be positive");
  if (is_overdamped(s))
    throw std::invalid_argument("constants_for: overdamped scheme has no Table row");

  const double sqM = std::sqrt(M);
  const double om_eta = one_minus_eta(gamma, h);
  SchemeConstants r{};
  r.scheme = s;
  r.m = m;
  r.M = M;
  r.gamma = gamma;
  r.h = h;
  r.a = 1.0 / M;
  r.gamma_implicit = false;
  r.gamma0 = std::numeric_limits<double>::quiet_NaN();

  switch (s) {
    case Scheme::em:
      r.h0 = 1.0 / (2.0 * gamma);
      r.gamma0 = 2.0 * sqM;
      r.b = 1.0 / gamma;
      r.c = m * h / (2.0 * gamma);
      r.C = 1.0;
      r.s_shift = 0;
      break;
    case Scheme::bbk:
      r.h0 = 1.0 / (4.0 * gamma);
      r.gamma0 = std::sqrt(12.0 * M);
      r.b = 0.5 * h + 1.0 / gamma;
      r.c = m * h / (4.0 * gamma);
      r.C = 7.0;
      r.s_shift = 1;
      break;
    case Scheme::spv:
    case Scheme::svv:
      r.h0 = 1.0 / (2.0 * gamma);
      r.gamma0 = std::sqrt(11.0 * M);
      r.b = h / om_eta;
      r.c = m * h / (4.0 * gamma);
      r.C = 7.0;
      r.s_shift = 1;
      break;
    case Scheme::baoab:
      r.h0 = om_eta / (2.0 * sqM);
      r.gamma_implicit = true;
      r.b = h / om_eta;
      r.c = h * h * m / (4.0 * om_eta);
      r.C = 7.0;
      r.s_shift = 1;
      break;
    case Scheme::obabo:
      r.h0 = om_eta / (4.0 * sqM);
      r.gamma_implicit = true;
      r.b = h / om_eta;
      r.c = h * h * m / (4.0 * om_eta);
      r.C = 7.0;
      r.s_shift = 1;
      break;
    case Scheme::roabao:
      r.h0 = om_eta / (2.0 * sqM);
      r.gamma_implicit = true;
      r.b = h / om_eta;
      r.c = h * h * m / (4.0 * om_eta);
      r.C = 7.0;
      r.s_shift = 1;
      break;
    case Scheme::ses:
      r.h0 = 1.0 / (2.0 * gamma);
      r.gamma0 = 5.0 * sqM;
      r.b = 1.0 / gamma;
      r.c = m * h / (4.0 * gamma);
      r.C = 1.0;
      r.s_shift = 0;
      break;
    default:
      throw std::invalid_argument("constants_for: unhandled scheme");
  }

  r.in_region = h < r.h0 && (r.gamma_implicit || gamma >= r.gamma0);
  if (r.in_region && !(r.b * r.b < r.a))
    throw std::logic_error("constants_for: b^2 >= a inside the stated region");
  return r;
}

double region_gamma_floor(Scheme s, double M) {
  const double sqM = std::sqrt(M);
  switch (s) {
    case Scheme::em: return 2.0 * sqM;
    case Scheme::bbk: return std::sqrt(12.0 * M);
    case Scheme::spv:
    case Scheme::svv: return std::sqrt(11.0 * M);
    case Scheme::ses: return 5.0 * sqM;
    case Scheme::baoab: return 4.0 * sqM;   // alpha = 2
    case Scheme::obabo: return 8.0 * sqM;   // alpha = 4
    case Scheme::roabao: return 4.0 * sqM;  // alpha = 2
    default:
      throw std::invalid_argument("region_gamma_floor: kinetic schemes only");
  }
}

double region_h_cap(Scheme s, double M, double gamma) {
  if (!(M > 0.0)) throw std::invalid_argument("region_h_cap: need M > 0");
  if (is_overdamped(s)) return 2.0 / M;
  if (!(gamma > 0.0)) throw std::invalid_argument("region_h_cap: need gamma > 0");
  double alpha;
  switch (s) {
    case Scheme::baoab:
    case Scheme::roabao: alpha = 2.0; break;
    case Scheme::obabo: alpha = 4.0; break;
    case Scheme::em:
    case Scheme::spv:
    case Scheme::svv:
    case Scheme::ses: return 1.0 / (2.0 * gamma);
    case Scheme::bbk: return 1.0 / (4.0 * gamma);
    default:
      throw std::invalid_argument("region_h_cap: unhandled scheme");
  }
  // Solve t = ratio (1 - exp(-t)) for t = gamma h by bisection on
  // G(t) = ratio (1 - exp(-t)) - t, which is positive just above the
  // degenerate root t = 0 and negative at t = ratio.
  const double ratio = gamma / (alpha * std::sqrt(M));
  if (!(ratio > 1.0)) return 0.0;
  double lo = std::min(ratio - 1.0, 1e-3);
  double hi = ratio;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double gmid = ratio * (-std::expm1(-mid)) - mid;
    (gmid > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / gamma;
}

StochasticSchemeConstants constants_for_sg(Scheme s, double m, double M,
                                           double gamma, double h, double cg) {
  if (!(cg >= 0.0))
    throw std::invalid_argument("constants_for_sg: C_G must be nonnegative");
  StochasticSchemeConstants r{};
  r.base = constants_for(s, m, M, gamma, h);
  r.cg = cg;
  const double h2 = h * h;
  const double om_eta = one_minus_eta(gamma, h);

  switch (s) {
    case Scheme::em:
      r.c = m * h / (2.0 * gamma) - 2.0 * h2 * cg / M;
      r.C = 1.0;
      break;
    case Scheme::bbk:
      r.c = m * h / (4.0 * gamma) - 4.0 * h2 * cg / M;
      r.C = 7.0 + 3.0 * h2 * cg / M;
      break;
    case Scheme::spv:
      r.c = m * h / (4.0 * gamma) - 4.0 * h2 * cg / M;
      r.C = 7.0 + 12.0 * h2 * cg / M;
      break;
    case Scheme::svv:
      r.c = m * h / (4.0 * gamma) - 4.0 * h2 * cg / M;
      r.C = 7.0 + 6.0 * h2 * cg / M;
      break;
    case Scheme::baoab:
      r.c = h2 * m / (4.0 * om_eta) -
            5.0 * h2 * cg * (std::exp(-gamma * h) / M + 0.25 * h2);
      r.C = 7.0 + 3.0 * h2 * cg / M;
      break;
    case Scheme::obabo:
      r.c = h2 * m / (4.0 * om_eta) - 4.0 * h2 * cg / M;
      r.C = 8.0 + 3.0 * h2 * cg / M;
      break;
    case Scheme::roabao:
      r.c = h2 * m / (4.0 * om_eta) -
            5.0 * h2 * cg * (std::exp(-gamma * h) / M + 0.25 * h2);
      r.C = 8.0 + 8.0 * h2 * cg / M;
      break;
    case Scheme::ses:
      r.c = m * h / (4.0 * gamma) - 4.0 * h2 * cg / M;
      r.C = 1.0;
      break;
    default:
      throw std::invalid_argument("constants_for_sg: unhandled scheme");
  }
  r.vacuous = !(r.c > 0.0);
  return r;
}

double overdamped_rate(double m, double M, double h, double cg) {
  if (!(m > 0.0) || !(M >= m) || !(h > 0.0))
    throw std::invalid_argument("overdamped_rate: invalid parameters");
  return h * m * (2.0 - h * M) - h * h * cg;
}

}  // namespace langevin
