#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "langevin/noise.hpp"

namespace langevin {

// Target potential contract: U is m-strongly convex with M-Lipschitz gradient,
// 0 < m <= M.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
  virtual double convexity() const = 0;   // m
  virtual double smoothness() const = 0;  // M
  virtual std::vector<double> minimizer() const = 0;

  std::vector<double> gradient_at(std::span<const double> x) const {
    std::vector<double> g(x.size());
    gradient(x, g);
    return g;
  }
};

// Potential with an additive data decomposition
//   U(x) = U_prior(x) + sum_{j=0}^{N-1} U_j(x),
// the structure stochastic-gradient estimators subsample over.
class DecomposablePotential : public Potential {
 public:
  virtual std::size_t data_size() const = 0;  // N
  virtual void prior_gradient(std::span<const double> x, std::span<double> g) const = 0;
  // g += w * grad U_j(x)
  virtual void add_component_gradient(std::size_t j, std::span<const double> x,
                                      std::span<double> g, double w) const = 0;
  // out += w * (Hessian of U_j at x) * p
  virtual void add_component_hessian_vec(std::size_t j, std::span<const double> x,
                                         std::span<const double> p,
                                         std::span<double> out, double w) const = 0;
};

// U(x) = 1/2 sum_i lambda_i x_i^2 with all lambda_i > 0.
class DiagonalGaussian final : public Potential {
 public:
  explicit DiagonalGaussian(std::vector<double> eigenvalues);

  std::size_t dim() const override { return eigs_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  double convexity() const override { return m_; }
  double smoothness() const override { return M_; }
  std::vector<double> minimizer() const override {
    return std::vector<double>(eigs_.size(), 0.0);
  }
  const std::vector<double>& eigenvalues() const { return eigs_; }

 private:
  std::vector<double> eigs_;
  double m_, M_;
};

std::unique_ptr<DiagonalGaussian> gaussian_potential(std::vector<double> eigenvalues);

// The same diagonal Gaussian written as a sum of N scaled copies,
//   U_j(x) = w_j * 1/2 sum_i lambda_i x_i^2,  sum_j w_j = 1, w_j > 0,
// so the generic subsampling estimators apply to a quadratic target.
// `spread` in [0,1) controls how unequal the weights are (0 = uniform split,
// i.e. a zero-variance decomposition).
class PartitionedGaussian final : public DecomposablePotential {
 public:
  PartitionedGaussian(std::vector<double> eigenvalues, std::size_t n_parts,
                      double spread, std::uint64_t seed);

  std::size_t dim() const override { return eigs_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  double convexity() const override { return m_; }
  double smoothness() const override { return M_; }
  std::vector<double> minimizer() const override {
    return std::vector<double>(eigs_.size(), 0.0);
  }

  std::size_t data_size() const override { return weights_.size(); }
  void prior_gradient(std::span<const double> x, std::span<double> g) const override;
  void add_component_gradient(std::size_t j, std::span<const double> x,
                              std::span<double> g, double w) const override;
  void add_component_hessian_vec(std::size_t j, std::span<const double> x,
                                 std::span<const double> p, std::span<double> out,
                                 double w) const override;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> eigs_;
  std::vector<double> weights_;
  double m_, M_;
};

// Gradient evaluations funnel through this so runs can count them exactly.
class GradientSource {
 public:
  virtual ~GradientSource() = default;
  virtual void eval(std::span<const double> x, std::span<double> g) = 0;
  long long evaluations() const { return evals_; }

 protected:
  long long evals_ = 0;
};

class PotentialGradient final : public GradientSource {
 public:
  explicit PotentialGradient(const Potential& pot) : pot_(pot) {}
  void eval(std::span<const double> x, std::span<double> g) override {
    pot_.gradient(x, g);
    ++evals_;
  }

 private:
  const Potential& pot_;
};

// Numerical sanity checks every potential must pass (used by tests).
struct PotentialCheckReport {
  double max_fd_rel_error;     // central finite differences vs gradient
  double min_monotone_ratio;   // <grad U(x)-grad U(y), x-y> / |x-y|^2, min over probes
  double max_monotone_ratio;
  bool pass;
};

PotentialCheckReport check_potential(const Potential& pot, int probes,
                                     NoiseStream& ns, double fd_tol = 1e-6);

}  // namespace langevin
