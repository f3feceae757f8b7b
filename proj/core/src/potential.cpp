#include "langevin/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace langevin {

DiagonalGaussian::DiagonalGaussian(std::vector<double> eigenvalues)
    : eigs_(std::move(eigenvalues)) {
  if (eigs_.empty())
    throw std::invalid_argument("gaussian_potential: need at least one eigenvalue");
  for (double e : eigs_)
    if (!(e > 0.0))
      throw std::invalid_argument("gaussian_potential: eigenvalues must be positive");
  m_ = *std::min_element(eigs_.begin(), eigs_.end());
  M_ = *std::max_element(eigs_.begin(), eigs_.end());
}

double DiagonalGaussian::value(std::span<const double> x) const {
  double u = 0.0;
  for (std::size_t i = 0; i < eigs_.size(); ++i) u += eigs_[i] * x[i] * x[i];
  return 0.5 * u;
}

void DiagonalGaussian::gradient(std::span<const double> x, std::span<double> g) const {
  for (std::size_t i = 0; i < eigs_.size(); ++i) g[i] = eigs_[i] * x[i];
}

std::unique_ptr<DiagonalGaussian> gaussian_potential(std::vector<double> eigenvalues) {
  return std::make_unique<DiagonalGaussian>(std::move(eigenvalues));
}

PartitionedGaussian::PartitionedGaussian(std::vector<double> eigenvalues,
                                         std::size_t n_parts, double spread,
                                         std::uint64_t seed)
    : eigs_(std::move(eigenvalues)) {
  if (eigs_.empty() || n_parts == 0)
    throw std::invalid_argument("PartitionedGaussian: empty eigenvalues or parts");
  if (!(spread >= 0.0 && spread < 1.0))
    throw std::invalid_argument("PartitionedGaussian: spread must be in [0,1)");
  for (double e : eigs_)
    if (!(e > 0.0))
      throw std::invalid_argument("PartitionedGaussian: eigenvalues must be positive");
  m_ = *std::min_element(eigs_.begin(), eigs_.end());
  M_ = *std::max_element(eigs_.begin(), eigs_.end());

  weights_.resize(n_parts);
  NoiseStream ns(seed, 0);
  double total = 0.0;
  for (double& w : weights_) {
    w = 1.0 + spread * (2.0 * ns.uniform01() - 1.0);
    total += w;
  }
  for (double& w : weights_) w /= total;
}

double PartitionedGaussian::value(std::span<const double> x) const {
  double u = 0.0;
  for (std::size_t i = 0; i < eigs_.size(); ++i) u += eigs_[i] * x[i] * x[i];
  return 0.5 * u;
}

void PartitionedGaussian::gradient(std::span<const double> x,
                                   std::span<double> g) const {
  for (std::size_t i = 0; i < eigs_.size(); ++i) g[i] = eigs_[i] * x[i];
}

void PartitionedGaussian::prior_gradient(std::span<const double>,
                                         std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
}

void PartitionedGaussian::add_component_gradient(std::size_t j,
                                                 std::span<const double> x,
                                                 std::span<double> g,
                                                 double w) const {
  const double s = w * weights_[j];
  for (std::size_t i = 0; i < eigs_.size(); ++i) g[i] += s * eigs_[i] * x[i];
}

void PartitionedGaussian::add_component_hessian_vec(std::size_t j,
                                                    std::span<const double>,
                                                    std::span<const double> p,
                                                    std::span<double> out,
                                                    double w) const {
  const double s = w * weights_[j];
  for (std::size_t i = 0; i < eigs_.size(); ++i) out[i] += s * eigs_[i] * p[i];
}

PotentialCheckReport check_potential(const Potential& pot, int probes,
                                     NoiseStream& ns, double fd_tol) {
  const std::size_t n = pot.dim();
  PotentialCheckReport rep{0.0, 1e300, -1e300, true};
  std::vector<double> x(n), y(n), gx(n), gy(n), xp(n), xm(n);
  for (int p = 0; p < probes; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ns.gaussian();
      y[i] = ns.gaussian();
    }
    pot.gradient(x, gx);
    pot.gradient(y, gy);

    // Central finite differences against the analytic gradient.
    const double eps = 1e-5;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(gx[i]));
    for (std::size_t i = 0; i < n; ++i) {
      xp = x;
      xm = x;
      xp[i] += eps;
      xm[i] -= eps;
      double fd = (pot.value(xp) - pot.value(xm)) / (2.0 * eps);
      double rel = std::abs(fd - gx[i]) / scale;
      rep.max_fd_rel_error = std::max(rep.max_fd_rel_error, rel);
    }

    // m |x-y|^2 <= <grad U(x) - grad U(y), x - y> <= M |x-y|^2.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = x[i] - y[i];
      num += (gx[i] - gy[i]) * d;
      den += d * d;
    }
    if (den > 0.0) {
      double ratio = num / den;
      rep.min_monotone_ratio = std::min(rep.min_monotone_ratio, ratio);
      rep.max_monotone_ratio = std::max(rep.max_monotone_ratio, ratio);
    }
  }
  const double slack = 1e-9 * pot.smoothness();
  rep.pass = rep.max_fd_rel_error <= fd_tol &&
             rep.min_monotone_ratio >= pot.convexity() - slack &&
             rep.max_monotone_ratio <= pot.smoothness() + slack;
  return rep;
}

}  // namespace langevin
