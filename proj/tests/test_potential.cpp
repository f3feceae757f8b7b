#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "langevin/logistic.hpp"
#include "langevin/noise.hpp"
#include "langevin/potential.hpp"

using namespace langevin;

namespace {

// Central finite difference of the value along coordinate i.
double fd_partial(const Potential& pot, std::vector<double> x, std::size_t i,
                  double eps) {
  x[i] += eps;
  const double up = pot.value(x);
  x[i] -= 2.0 * eps;
  const double dn = pot.value(x);
  return (up - dn) / (2.0 * eps);
}

}  // namespace

TEST_CASE("diagonal gaussian: hand values, curvature, finite differences") {
  auto pot = gaussian_potential({1.0, 10.0});
  CHECK(pot->dim() == 2);
  CHECK(pot->convexity() == 1.0);
  CHECK(pot->smoothness() == 10.0);

  std::vector<double> x = {1.0, 1.0};
  CHECK(pot->value(x) == doctest::Approx(5.5).epsilon(1e-15));
  auto g = pot->gradient_at(x);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(pot->value(pot->minimizer()) == 0.0);

  std::vector<double> probe = {0.37, -1.42};
  auto gp = pot->gradient_at(probe);
  for (std::size_t i = 0; i < 2; ++i) {
    const double fd = fd_partial(*pot, probe, i, 1e-6);
    CHECK(gp[i] == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("diagonal gaussian: degenerate spectra are rejected") {
  CHECK_THROWS_AS(gaussian_potential({}), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_potential({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_potential({-2.0}), std::invalid_argument);
}

TEST_CASE("check_potential passes on the quadratic target") {
  auto pot = gaussian_potential({1.0, 4.0, 10.0});
  NoiseStream ns(31, 0);
  auto rep = check_potential(*pot, 20, ns);
  CHECK(rep.pass);
  CHECK(rep.max_fd_rel_error <= 1e-6);
  CHECK(rep.min_monotone_ratio >= 1.0 - 1e-6);
  CHECK(rep.max_monotone_ratio <= 10.0 + 1e-6);
}

TEST_CASE("partitioned gaussian: weights and gradient decomposition") {
  PartitionedGaussian pot({1.0, 10.0}, 8, 0.5, 17);
  const auto& w = pot.weights();
  REQUIRE(w.size() == 8);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double wi : w) CHECK(wi > 0.0);

  std::vector<double> x = {0.8, -0.45};
  auto full = pot.gradient_at(x);
  std::vector<double> sum(2, 0.0);
  pot.prior_gradient(x, sum);
  for (std::size_t j = 0; j < pot.data_size(); ++j)
    pot.add_component_gradient(j, x, sum, 1.0);
  CHECK(sum[0] == doctest::Approx(full[0]).epsilon(1e-12));
  CHECK(sum[1] == doctest::Approx(full[1]).epsilon(1e-12));

  // Quadratic Hessian: summing component Hessian-vector products gives
  // diag(lambda) p.
  std::vector<double> p = {1.0, -2.0}, hp(2, 0.0);
  for (std::size_t j = 0; j < pot.data_size(); ++j)
    pot.add_component_hessian_vec(j, x, p, hp, 1.0);
  CHECK(hp[0] == doctest::Approx(1.0 * p[0]).epsilon(1e-12));
  CHECK(hp[1] == doctest::Approx(10.0 * p[1]).epsilon(1e-12));

  CHECK_THROWS_AS(PartitionedGaussian({1.0}, 0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(PartitionedGaussian({1.0}, 4, 1.0, 1), std::invalid_argument);

  // spread = 0 is the uniform, zero-variance split.
  PartitionedGaussian flat({2.0}, 5, 0.0, 3);
  for (double wi : flat.weights()) CHECK(wi == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("synth dataset: deterministic, shaped, balanced at zero separation") {
  auto a = synth_dataset(7, 50, 3, 1.5);
  auto b = synth_dataset(7, 50, 3, 1.5);
  CHECK(a.size() == 50);
  CHECK(a.n_features == 3);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);

  auto c = synth_dataset(8, 50, 3, 1.5);
  CHECK(a.features != c.features);

  const std::size_t n = 2000;
  auto flat = synth_dataset(123, n, 4, 0.0);
  double ones = 0.0;
  for (auto y : flat.labels) ones += y;
  const double prop = ones / static_cast<double>(n);
  CHECK(std::abs(prop - 0.5) <= 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("logistic potential: gradient at zero is the label residual sum") {
  auto data = synth_dataset(5, 40, 3, 1.0);
  auto pot = blr_potential(data, 1.0);
  CHECK(pot->dim() == 3);
  CHECK(pot->data_size() == 40);
  CHECK(pot->convexity() == doctest::Approx(1.0));  // 1/sigma2
  CHECK(pot->smoothness() ==
        doctest::Approx(1.0 + 0.25 * pot->xtx_lambda_max()));

  std::vector<double> zero(3, 0.0), expect(3, 0.0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    auto row = data.row(j);
    const double r = 0.5 - static_cast<double>(data.labels[j]);
    for (std::size_t i = 0; i < 3; ++i) expect[i] += r * row[i];
  }
  auto g0 = pot->gradient_at(zero);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(g0[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("logistic potential: finite differences and monotonicity probes") {
  auto pot = blr_potential(synth_dataset(9, 30, 4, 0.8), 2.0);
  std::vector<double> q = {0.2, -0.1, 0.05, 0.3};
  auto g = pot->gradient_at(q);
  for (std::size_t i = 0; i < 4; ++i) {
    const double fd = fd_partial(*pot, q, i, 1e-5);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
  }
  NoiseStream ns(77, 1);
  auto rep = check_potential(*pot, 20, ns);
  CHECK(rep.pass);
  CHECK(rep.min_monotone_ratio >= pot->convexity() - 1e-9);
  CHECK(rep.max_monotone_ratio <= pot->smoothness() + 1e-9);
}

TEST_CASE("logistic potential: component decomposition reassembles exactly") {
  auto pot = blr_potential(synth_dataset(11, 25, 3, 1.2), 1.5);
  std::vector<double> q = {0.4, 0.1, -0.25};
  auto full = pot->gradient_at(q);
  std::vector<double> sum(3, 0.0);
  pot->prior_gradient(q, sum);
  for (std::size_t j = 0; j < pot->data_size(); ++j)
    pot->add_component_gradient(j, q, sum, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(sum[i] == doctest::Approx(full[i]).epsilon(1e-12));

  // Component Hessian-vector products against a finite difference of the
  // assembled gradient (prior Hessian is I/sigma2).
  std::vector<double> p = {0.3, -0.7, 0.5};
  std::vector<double> hp(3, 0.0);
  for (std::size_t j = 0; j < pot->data_size(); ++j)
    pot->add_component_hessian_vec(j, q, p, hp, 1.0);
  for (std::size_t i = 0; i < 3; ++i) hp[i] += p[i] / pot->sigma2();

  const double eps = 1e-6;
  std::vector<double> qp = q, qm = q;
  for (std::size_t i = 0; i < 3; ++i) {
    qp[i] += eps * p[i];
    qm[i] -= eps * p[i];
  }
  auto gp = pot->gradient_at(qp);
  auto gm = pot->gradient_at(qm);
  for (std::size_t i = 0; i < 3; ++i) {
    const double fd = (gp[i] - gm[i]) / (2.0 * eps);
    CHECK(hp[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("logistic potential: minimizer and curvature refinement") {
  auto pot = blr_potential(synth_dataset(3, 60, 4, 1.0), 1.0);
  auto q = pot->minimizer();
  auto g = pot->gradient_at(q);
  double gnorm = 0.0;
  for (double gi : g) gnorm += gi * gi;
  CHECK(std::sqrt(gnorm) < 1e-7);

  const double m0 = pot->convexity(), M0 = pot->smoothness();
  pot->use_minimizer_curvature();
  CHECK(pot->convexity() >= m0 - 1e-12);
  CHECK(pot->smoothness() <= M0 + 1e-12);
  CHECK(pot->convexity() <= pot->smoothness());
  // Prior curvature is a hard floor for the Hessian everywhere.
  CHECK(pot->convexity() >= 1.0 - 1e-9);
}

TEST_CASE("sigmoid: midpoint, symmetry, saturation") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(3.2) + sigmoid(-3.2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigmoid(40.0) <= 1.0);
  CHECK(sigmoid(40.0) > 0.999999);
  CHECK(sigmoid(-40.0) >= 0.0);
  CHECK(sigmoid(-40.0) < 1e-6);
}
