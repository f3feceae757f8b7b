#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "langevin/potential.hpp"

namespace langevin {

// Binary-response design matrix: N rows of d features plus 0/1 labels.
struct LogisticData {
  std::size_t n_features = 0;     // d
  std::vector<double> features;   // row-major, N x d
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t j) const {
    return {features.data() + j * n_features, n_features};
  }
};

// Features i.i.d. standard normal; labels drawn from the logistic model at a
// ground-truth weight vector of norm `separation` (direction fixed by the
// seed).  separation = 0 gives coin-flip labels.
LogisticData synth_dataset(std::uint64_t seed, std::size_t n, std::size_t d,
                           double separation);

// Header "y,x1..xd", one row per observation.
void write_dataset_csv(const LogisticData& data, const std::string& path);

// Posterior potential of Bayesian logistic regression with a N(0, sigma2 I)
// prior:
//   U(q) = |q|^2/(2 sigma2) + sum_j [log(1+exp(<x_j,q>)) - y_j <x_j,q>].
// Curvature bounds: m = 1/sigma2 and M = 1/sigma2 + (1/4) lambda_max(X^T X)
// by default; Hessian-at-minimizer eigenvalue bounds available as a variant.
class LogisticRegressionPotential final : public DecomposablePotential {
 public:
  LogisticRegressionPotential(LogisticData data, double sigma2);

  std::size_t dim() const override { return data_.n_features; }
  double value(std::span<const double> q) const override;
  void gradient(std::span<const double> q, std::span<double> g) const override;
  double convexity() const override { return m_; }
  double smoothness() const override { return M_; }
  std::vector<double> minimizer() const override;

  std::size_t data_size() const override { return data_.size(); }
  void prior_gradient(std::span<const double> q, std::span<double> g) const override;
  void add_component_gradient(std::size_t j, std::span<const double> q,
                              std::span<double> g, double w) const override;
  void add_component_hessian_vec(std::size_t j, std::span<const double> q,
                                 std::span<const double> p, std::span<double> out,
                                 double w) const override;

  // Replace the analytic (m, M) with extreme Hessian eigenvalues at the
  // minimizer, computed by power iteration.
  void use_minimizer_curvature();

  const LogisticData& data() const { return data_; }
  double sigma2() const { return sigma2_; }
  double xtx_lambda_max() const { return xtx_lmax_; }

 private:
  void hessian_vec(std::span<const double> q, std::span<const double> p,
                   std::span<double> out) const;

  LogisticData data_;
  double sigma2_;
  double xtx_lmax_;
  double m_, M_;
  mutable std::vector<double> minimizer_;  // cached after first solve
};

std::unique_ptr<LogisticRegressionPotential> blr_potential(LogisticData data,
                                                           double sigma2);

double sigmoid(double t);

}  // namespace langevin
