#pragma once

#include "langevin/constants.hpp"
#include "langevin/integrator.hpp"

namespace langevin {

// Scalar entries of the one-step contraction form
//   H(lambda) = (1 - c(h)) N - P^T N P,   N = [[1, b], [b, a]],
// where P is the one-step difference map of the proof's rearranged
// composition (BBK: B1.B2.A; SPV/SVV: Vs.A; rOABAO: O.ABA with midpoint u)
// evaluated on a quadratic mode with curvature lambda.  H positive definite
// for all lambda in [m, M] (and all u in [0, h]) certifies the per-step
// contraction the rate theorem needs.
struct CertificateForm {
  double A, B, C;  // H = [[A, B], [B, C]]
};

// Transcribed closed-form polynomials (available for BBK, SPV, rOABAO; SVV
// shares SPV's proof).  u is ignored except for rOABAO.
CertificateForm certificate_form(Scheme s, double m, double M, double gamma,
                                 double h, double lambda, double u = 0.0);

// Same entries built numerically from the rearranged one-step matrix; serves
// as an oracle for the transcriptions and as the provisional certificate for
// EM, BAOAB, OBABO and SES, whose closed forms live in prior work.
CertificateForm certificate_form_matrix(Scheme s, double m, double M, double gamma,
                                        double h, double lambda, double u = 0.0);

struct CertificateReport {
  Scheme scheme;
  double m, M, gamma, h;
  int lambda_points;
  int u_points;            // 1 for every scheme but rOABAO
  double min_A;
  double min_det;          // min over the grid of A*C - B^2
  double lambda_at_min_A;
  double lambda_at_min_det;
  double u_at_min_det;     // 0 when there is no u sweep
  bool extended;           // matrix-form path (EM/BAOAB/OBABO/SES)
  bool pass;               // both minima strictly positive
};

// Grid certificate: evaluates the form on a uniform lambda-grid over [m, M]
// (endpoints included) and, for rOABAO, a uniform u-grid over [0, h].
// BBK/SPV/SVV/rOABAO use the transcribed polynomials.  EM/BAOAB/OBABO/SES
// have no transcription here and throw unless `extended` is set, which
// switches them to the matrix-built form.
CertificateReport certify(Scheme s, double m, double M, double gamma, double h,
                          int lambda_points = 2048, int u_points = 256,
                          bool extended = false);

}  // namespace langevin
