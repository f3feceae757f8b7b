#include "langevin/certificate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "langevin/spectral.hpp"

namespace langevin {

namespace {

void validate_u(Scheme s, double h, double u) {
  if (s != Scheme::roabao) return;
  if (!(u >= 0.0) || !(u <= h))
    throw std::invalid_argument("certificate: rOABAO midpoint u must lie in [0, h]");
}

// One-step difference map of the rearranged composition the proof certifies.
Mat2 rearranged_map(Scheme s, double lambda, const IntegratorParams& p, double u) {
  const double h = p.h;
  switch (s) {
    case Scheme::em:
      return mode_matrix(Scheme::em, lambda, p);
    case Scheme::ses:
      return mode_matrix(Scheme::ses, lambda, p);
    case Scheme::bbk: {
      // B1 . B2 . A (A applied first): x' = x + h v,
      // v' = (s v - h lambda x') / d.
      const double d = 1.0 + 0.5 * p.gamma * h;
      const double sfac = 1.0 - 0.5 * p.gamma * h;
      return {1.0, h, -h * lambda / d, (sfac - h * h * lambda) / d};
    }
    case Scheme::spv:
    case Scheme::svv: {
      // Vs . A with a full A step (SVV's half V-steps merge the same way).
      const double w = p.one_m_eta / p.gamma;
      return {1.0, h, -w * lambda, p.eta - w * h * lambda};
    }
    case Scheme::roabao: {
      // O . ABA with midpoint u: x' = x + h v - (h^2/2) lambda (x + u v),
      // v' = eta (v - h lambda (x + u v)).
      const double hh2 = 0.5 * h * h * lambda;
      return {1.0 - hh2, h - hh2 * u, -h * p.eta * lambda,
              p.eta * (1.0 - h * lambda * u)};
    }
    case Scheme::baoab:
      // Bulk unit of (B A O A B)^n after merging half-B kicks: A.B.A.O with
      // A halves and a full B (A applied first, O last).
      return Mat2{1.0, 0.0, 0.0, p.eta} * Mat2{1.0, 0.5 * h, 0.0, 1.0} *
             Mat2{1.0, 0.0, -h * lambda, 1.0} * Mat2{1.0, 0.5 * h, 0.0, 1.0};
    case Scheme::obabo:
      // Bulk unit of (O B A B O)^n after merging half-O steps: B.O.B.A with
      // B halves and a full O (B applied first, A last).
      return Mat2{1.0, h, 0.0, 1.0} * Mat2{1.0, 0.0, -0.5 * h * lambda, 1.0} *
             Mat2{1.0, 0.0, 0.0, p.eta} * Mat2{1.0, 0.0, -0.5 * h * lambda, 1.0};
    default:
      throw std::invalid_argument("certificate: kinetic schemes only");
  }
}

}  // namespace

CertificateForm certificate_form(Scheme s, double m, double M, double gamma,
                                 double h, double lambda, double u) {
  const SchemeConstants k = constants_for(s, m, M, gamma, h);
  const IntegratorParams p = IntegratorParams::kinetic(h, gamma);
  validate_u(s, h, u);
  const double a = k.a, b = k.b, c = k.c;
  const double eta = p.eta;

  switch (s) {
    case Scheme::bbk: {
      const double d = 1.0 + 0.5 * gamma * h;
      const double sfac = 1.0 - 0.5 * gamma * h;
      const double A = -c + (2.0 * b * h / d) * lambda -
                       (a * h * h / (d * d)) * lambda * lambda;
      const double B = -b * c +
                       (a * h * sfac / (d * d) + 2.0 * b * h * h / d) * lambda -
                       (a * h * h * h / (d * d)) * lambda * lambda;
      const double C = a * (1.0 - c) - h * h - a * sfac * sfac / (d * d) -
                       2.0 * b * h * sfac / d +
                       (2.0 * a * h * h * sfac / (d * d) + 2.0 * b * h * h * h / d) * lambda -
                       (a * h * h * h * h / (d * d)) * lambda * lambda;
      return {A, B, C};
    }
    case Scheme::spv:
    case Scheme::svv: {
      const double w = p.one_m_eta / gamma;
      const double A = -c + 2.0 * b * w * lambda - a * w * w * lambda * lambda;
      const double B = -b * c + (a * eta * w + 2.0 * b * h * w) * lambda -
                       a * h * w * w * lambda * lambda;
      const double C = a * (1.0 - eta * eta) - a * c - 2.0 * b * eta * h - h * h +
                       2.0 * h * w * (a * eta + b * h) * lambda -
                       a * h * h * w * w * lambda * lambda;
      return {A, B, C};
    }
    case Scheme::roabao: {
      const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
      const double e2 = eta * eta;
      const double A = -c + (2.0 * b * eta * h + h2) * lambda +
                       (-a * e2 * h2 - b * eta * h3 - 0.25 * h4) * lambda * lambda;
      const double B = -b * c +
                       (a * e2 * h + 1.5 * b * eta * h2 + b * eta * h * u +
                        0.5 * h2 * u + 0.5 * h3) * lambda +
                       (-a * e2 * h2 * u - b * eta * h3 * u - 0.25 * h4 * u) * lambda * lambda;
      const double C = a * (1.0 - e2) - a * c - 2.0 * b * eta * h - h2 +
                       (2.0 * a * e2 * h * u + 3.0 * b * eta * h2 * u + h3 * u) * lambda +
                       (-a * e2 * h2 * u * u - b * eta * h3 * u * u - 0.25 * h4 * u * u) *
                           lambda * lambda;
      return {A, B, C};
    }
    default:
      throw std::invalid_argument(
          "certificate_form: closed forms are transcribed for BBK, SPV, SVV and "
          "rOABAO only; the other schemes' forms live in prior work (see "
          "certificate_form_matrix / the extended flag)");
  }
}

CertificateForm certificate_form_matrix(Scheme s, double m, double M, double gamma,
                                        double h, double lambda, double u) {
  const SchemeConstants k = constants_for(s, m, M, gamma, h);
  const IntegratorParams p = IntegratorParams::kinetic(h, gamma);
  validate_u(s, h, u);
  const Mat2 P = rearranged_map(s, lambda, p, u);
  const double a = k.a, b = k.b, omc = 1.0 - k.c;
  // H = (1-c) N - P^T N P with N = [[1, b], [b, a]].
  const double A = omc - (P.a11 * P.a11 + 2.0 * b * P.a11 * P.a21 + a * P.a21 * P.a21);
  const double B = omc * b - (P.a11 * P.a12 + b * (P.a11 * P.a22 + P.a12 * P.a21) +
                              a * P.a21 * P.a22);
  const double C = omc * a - (P.a12 * P.a12 + 2.0 * b * P.a12 * P.a22 + a * P.a22 * P.a22);
  return {A, B, C};
}

CertificateReport certify(Scheme s, double m, double M, double gamma, double h,
                          int lambda_points, int u_points, bool extended) {
  if (is_overdamped(s))
    throw std::invalid_argument("certify: kinetic schemes only");
  if (lambda_points < 2)
    throw std::invalid_argument("certify: need at least 2 lambda grid points");
  const bool sweep_u = (s == Scheme::roabao);
  if (sweep_u && u_points < 2)
    throw std::invalid_argument("certify: rOABAO needs at least 2 midpoint grid points");

  const bool transcribed = (s == Scheme::bbk || s == Scheme::spv ||
                            s == Scheme::svv || s == Scheme::roabao);
  if (!transcribed && !extended)
    throw std::invalid_argument(
        "certify: closed forms for this scheme come from prior work; pass "
        "extended=true for the (provisional) matrix-built certificate");

  constants_for(s, m, M, gamma, h);  // validates the parameter point

  CertificateReport rep{};
  rep.scheme = s;
  rep.m = m;
  rep.M = M;
  rep.gamma = gamma;
  rep.h = h;
  rep.lambda_points = lambda_points;
  rep.u_points = sweep_u ? u_points : 1;
  rep.min_A = std::numeric_limits<double>::infinity();
  rep.min_det = std::numeric_limits<double>::infinity();
  rep.lambda_at_min_A = m;
  rep.lambda_at_min_det = m;
  rep.u_at_min_det = 0.0;
  rep.extended = !transcribed;

  const int nu = rep.u_points;
  for (int i = 0; i < lambda_points; ++i) {
    const double lambda =
        m + (M - m) * static_cast<double>(i) / static_cast<double>(lambda_points - 1);
    for (int j = 0; j < nu; ++j) {
      const double u =
          sweep_u ? h * static_cast<double>(j) / static_cast<double>(nu - 1) : 0.0;
      const CertificateForm f = transcribed
                                    ? certificate_form(s, m, M, gamma, h, lambda, u)
                                    : certificate_form_matrix(s, m, M, gamma, h, lambda, u);
      if (f.A < rep.min_A) {
        rep.min_A = f.A;
        rep.lambda_at_min_A = lambda;
      }
      const double det = f.A * f.C - f.B * f.B;
      if (det < rep.min_det) {
        rep.min_det = det;
        rep.lambda_at_min_det = lambda;
        rep.u_at_min_det = u;
      }
    }
  }
  rep.pass = rep.min_A > 0.0 && rep.min_det > 0.0;
  return rep;
}

}  // namespace langevin
