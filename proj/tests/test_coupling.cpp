#include <doctest.h>

#include <string>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "langevin/constants.hpp"
#include "langevin/coupling.hpp"
#include "langevin/logistic.hpp"
#include "langevin/potential.hpp"

using namespace langevin;

namespace {

const double kM = 10.0;

PhaseState offset_state(double dx, double dv) {
  return PhaseState{{0.4 + dx, -0.2}, {0.1, 0.3 + dv}};
}

}  // namespace

TEST_CASE("coupled run: identical starts stay merged") {
  auto pot = gaussian_potential({1.0, kM});
  auto z = offset_state(0.0, 0.0);
  NoiseStream ns(5, 0);
  auto p = IntegratorParams::kinetic(0.05, 8.0);
  auto res = coupled_run(Scheme::baoab, *pot, ModifiedNorm(0.1, 0.0), z, z, p, 50, ns);
  REQUIRE(res.distances.size() == 51);
  for (double d : res.distances) CHECK(d == 0.0);
  CHECK(!res.divergent);
}

TEST_CASE("coupled run: EM obeys its contraction bound for 1000 steps") {
  auto pot = gaussian_potential({1.0, kM});
  const double gamma = 2.0 * std::sqrt(kM), h = 0.05;
  auto cs = constants_for(Scheme::em, 1.0, kM, gamma, h);
  REQUIRE(cs.in_region);
  auto norm = cs.norm();

  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.8, -0.6);
  NoiseStream ns(101, 0);
  auto res = coupled_run(Scheme::em, *pot, norm, z0, z1,
                         IntegratorParams::kinetic(h, gamma), 1000, ns);
  REQUIRE(!res.divergent);
  const double d0_sq = res.distances[0] * res.distances[0];
  for (std::size_t k = 0; k < res.distances.size(); ++k) {
    const double bound = cs.bound_sq(static_cast<long long>(k), d0_sq);
    CHECK(res.distances[k] * res.distances[k] <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("coupled run: every scheme honors its bound at half the cap") {
  auto pot = gaussian_potential({1.0, kM});
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(-0.9, 0.7);
  for (Scheme s : kKineticSchemes) {
    const std::string tag = to_string(s);
    CAPTURE(tag);
    const double gamma = region_gamma_floor(s, kM) * 1.05;
    const double h = 0.5 * region_h_cap(s, kM, gamma);
    auto cs = constants_for(s, 1.0, kM, gamma, h);
    REQUIRE(cs.in_region);
    NoiseStream ns(7, 3);
    auto res = coupled_run(s, *pot, cs.norm(), z0, z1,
                           IntegratorParams::kinetic(h, gamma), 400, ns);
    REQUIRE(!res.divergent);
    const double d0_sq = res.distances[0] * res.distances[0];
    for (std::size_t k = 0; k < res.distances.size(); ++k) {
      const double bound = cs.bound_sq(static_cast<long long>(k), d0_sq);
      CHECK(res.distances[k] * res.distances[k] <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("coupled run: distances are noise-independent on quadratics except rOABAO") {
  auto pot = gaussian_potential({1.0, kM});
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.5, 0.5);
  for (Scheme s : kKineticSchemes) {
    if (s == Scheme::roabao) continue;  // the midpoint draw enters the map
    const std::string tag = to_string(s);
    CAPTURE(tag);
    const double gamma = region_gamma_floor(s, kM) * 1.05;
    const double h = 0.5 * region_h_cap(s, kM, gamma);
    auto cs = constants_for(s, 1.0, kM, gamma, h);
    NoiseStream ns_a(1, 0), ns_b(999, 42);
    auto p = IntegratorParams::kinetic(h, gamma);
    auto ra = coupled_run(s, *pot, cs.norm(), z0, z1, p, 200, ns_a);
    auto rb = coupled_run(s, *pot, cs.norm(), z0, z1, p, 200, ns_b);
    for (std::size_t k = 0; k < ra.distances.size(); ++k) {
      CHECK(ra.distances[k] ==
            doctest::Approx(rb.distances[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("coupled run: out-of-region EM step diverges as data, not as an error") {
  auto pot = gaussian_potential({1.0, kM});
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.5, 0.5);
  NoiseStream ns(3, 0);
  auto res = coupled_run(Scheme::em, *pot, ModifiedNorm(0.1, 0.0), z0, z1,
                         IntegratorParams::kinetic(1.5, 1.0), 4000, ns);
  CHECK(res.divergent);
  CHECK(res.diverged_at >= 0);
  CHECK(res.distances.size() ==
        static_cast<std::size_t>(res.diverged_at) + 1);
  CHECK(res.distances.back() >= kDivergenceThreshold);
}

TEST_CASE("coupled run: overdamped schemes are redirected") {
  auto pot = gaussian_potential({1.0});
  PhaseState z(1);
  NoiseStream ns(1, 0);
  CHECK_THROWS_AS(coupled_run(Scheme::od_em, *pot, ModifiedNorm(1.0, 0.0), z, z,
                              IntegratorParams::overdamped(0.1), 10, ns),
                  std::invalid_argument);
}

TEST_CASE("empirical rate: exact geometric decay and edge cases") {
  std::vector<double> traj(200);
  for (std::size_t k = 0; k < traj.size(); ++k) traj[k] = 3.0 * std::pow(0.9, k);
  CHECK(empirical_rate(traj, 20) == doctest::Approx(0.9).epsilon(1e-12));

  std::vector<double> flat(100, 2.0);
  CHECK(empirical_rate(flat, 10) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(empirical_rate(std::vector<double>(15, 1.0), 10),
                  std::invalid_argument);
  // A zero distance inside the window means the chains merged; the fit is
  // refused as a data problem, not an argument problem.
  std::vector<double> merged(100, 0.0);
  CHECK_THROWS_AS(empirical_rate(merged, 10), std::runtime_error);
}

TEST_CASE("empirical rate: fitted contraction is at least the guaranteed one") {
  auto pot = gaussian_potential({1.0, kM});
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.6, -0.4);
  for (Scheme s : {Scheme::em, Scheme::baoab, Scheme::ses}) {
    const std::string tag = to_string(s);
    CAPTURE(tag);
    const double gamma = region_gamma_floor(s, kM) * 1.05;
    const double h = 0.5 * region_h_cap(s, kM, gamma);
    auto cs = constants_for(s, 1.0, kM, gamma, h);
    NoiseStream ns(11, 0);
    auto res = coupled_run(s, *pot, cs.norm(), z0, z1,
                           IntegratorParams::kinetic(h, gamma), 600, ns);
    const double rho = empirical_rate(res.distances, 100);
    // One-step guarantee on the squared norm: rho^2 <= 1 - c.
    CHECK(rho * rho <= 1.0 - cs.c + 1e-9);
    CHECK(rho < 1.0);
    CHECK(rho > 0.5);
  }
}

TEST_CASE("coupled sg run: full estimator reproduces coupled_run bitwise") {
  PartitionedGaussian pot({1.0, kM}, 10, 0.5, 21);
  auto est = make_estimator(pot, GradientKind::full, 0);
  const double gamma = region_gamma_floor(Scheme::baoab, kM) * 1.05;
  const double h = 0.5 * region_h_cap(Scheme::baoab, kM, gamma);
  auto cs = constants_for(Scheme::baoab, 1.0, kM, gamma, h);
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.3, 0.2);
  const std::uint64_t seed = 31;

  auto sg = coupled_run_sg(Scheme::baoab, est, cs.norm(), z0, z1,
                           IntegratorParams::kinetic(h, gamma), 120, 1, seed);
  NoiseStream ns(seed, 0);  // replica r uses NoiseStream(seed, r)
  auto full = coupled_run(Scheme::baoab, pot, cs.norm(), z0, z1,
                          IntegratorParams::kinetic(h, gamma), 120, ns);
  REQUIRE(sg.mean_sq.size() == full.distances.size());
  CHECK(sg.divergent_replicas == 0);
  for (std::size_t k = 0; k < sg.mean_sq.size(); ++k) {
    CHECK(std::sqrt(sg.mean_sq[k]) == full.distances[k]);
    CHECK(sg.se[k] == 0.0);
  }
}

TEST_CASE("coupled sg run: whole-dataset batches equal the full gradient") {
  PartitionedGaussian pot({1.0, kM}, 8, 0.6, 5);
  auto full = make_estimator(pot, GradientKind::full, 0);
  auto whole = make_estimator(pot, GradientKind::subsampled, 8);
  const double gamma = region_gamma_floor(Scheme::em, kM) * 1.05;
  const double h = 0.5 * region_h_cap(Scheme::em, kM, gamma);
  auto cs = constants_for(Scheme::em, 1.0, kM, gamma, h);
  auto z0 = offset_state(0.0, 0.0);
  auto z1 = offset_state(0.4, -0.1);
  auto p = IntegratorParams::kinetic(h, gamma);

  auto a = coupled_run_sg(Scheme::em, full, cs.norm(), z0, z1, p, 80, 2, 77);
  auto b = coupled_run_sg(Scheme::em, whole, cs.norm(), z0, z1, p, 80, 2, 77);
  for (std::size_t k = 0; k < a.mean_sq.size(); ++k) {
    CHECK(a.mean_sq[k] == doctest::Approx(b.mean_sq[k]).epsilon(1e-12));
  }
}

TEST_CASE("coupled sg run: subsampled logistic chains respect the penalized bound") {
  auto blr = blr_potential(synth_dataset(7, 120, 5, 1.0), 1.0);
  const double m = blr->convexity(), M = blr->smoothness();
  auto est = make_estimator(*blr, GradientKind::subsampled, 30);

  // Measure the gradient-noise bound near the minimizer, then pick (gamma, h)
  // with a nonvacuous stochastic rate.
  auto qmin = blr->minimizer();
  std::vector<std::vector<double>> probes = {qmin};
  NoiseStream cg_ns(17, 0);
  auto cg = estimate_CG(est, probes, 150, cg_ns);
  const double cgv = cg.value + cg.ci_half_width;

  const double gamma = region_gamma_floor(Scheme::em, M) * 1.05;
  double h = 0.25 * region_h_cap(Scheme::em, M, gamma);
  auto sgc = constants_for_sg(Scheme::em, m, M, gamma, h, cgv);
  while (sgc.vacuous) {
    h *= 0.5;
    sgc = constants_for_sg(Scheme::em, m, M, gamma, h, cgv);
  }
  REQUIRE(!sgc.vacuous);

  PhaseState z0(qmin, std::vector<double>(5, 0.0));
  auto x1 = qmin;
  x1[0] += 0.4;
  PhaseState z1(x1, std::vector<double>(5, 0.0));

  auto res = coupled_run_sg(Scheme::em, est, sgc.base.norm(), z0, z1,
                            IntegratorParams::kinetic(h, gamma), 300, 48, 2024);
  CHECK(res.divergent_replicas == 0);
  const double d0_sq = res.mean_sq[0];
  int checked = 0;
  for (std::size_t k = 0; k < res.mean_sq.size(); ++k) {
    const double bound = sgc.bound_sq(static_cast<long long>(k), d0_sq);
    CHECK(res.mean_sq[k] + 1.96 * res.se[k] <= bound * (1.0 + 1e-12));
    ++checked;
  }
  CHECK(checked == 301);
}

TEST_CASE("overdamped coupling: exact factor, OD-LM identity, penalized bound") {
  // Full-gradient OD-EM on the quadratic contracts each mode by |1 - h
  // lambda| exactly.
  PartitionedGaussian pot({1.0}, 6, 0.4, 3);
  auto full = make_estimator(pot, GradientKind::full, 0);
  auto p = IntegratorParams::overdamped(0.1);
  std::vector<double> x0 = {0.0}, y0 = {1.0};
  auto res = coupled_run_overdamped(Scheme::od_em, full, x0, y0, p, 20, 1, 9);
  for (std::size_t k = 0; k < res.mean_sq.size(); ++k) {
    CHECK(res.mean_sq[k] == doctest::Approx(std::pow(0.81, k)).epsilon(1e-12));
  }

  // OD-LM differences match OD-EM's exactly (averaged noise cancels).
  auto lm = coupled_run_overdamped(Scheme::od_lm, full, x0, y0, p, 20, 1, 9);
  for (std::size_t k = 0; k < res.mean_sq.size(); ++k) {
    CHECK(lm.mean_sq[k] == doctest::Approx(res.mean_sq[k]).epsilon(1e-12));
  }

  // Subsampled logistic chains against exp(-rate * k) with the measured C_G.
  auto blr = blr_potential(synth_dataset(19, 100, 4, 1.0), 1.0);
  const double m = blr->convexity(), M = blr->smoothness();
  auto est = make_estimator(*blr, GradientKind::subsampled, 25);
  auto qmin = blr->minimizer();
  std::vector<std::vector<double>> probes = {qmin};
  NoiseStream cg_ns(23, 0);
  auto cg = estimate_CG(est, probes, 150, cg_ns);
  double h = 0.25 * region_h_cap(Scheme::od_em, M, 0.0);
  double rate = overdamped_rate(m, M, h, cg.value + cg.ci_half_width);
  while (!(rate > 0.0)) {
    h *= 0.5;
    rate = overdamped_rate(m, M, h, cg.value + cg.ci_half_width);
  }
  auto y1 = qmin;
  y1[1] += 0.5;
  auto sg = coupled_run_overdamped(Scheme::od_em, est, qmin, y1,
                                   IntegratorParams::overdamped(h), 250, 48, 7);
  CHECK(sg.divergent_replicas == 0);
  const double d0 = sg.mean_sq[0];
  for (std::size_t k = 0; k < sg.mean_sq.size(); ++k) {
    const double bound = d0 * std::pow(1.0 - rate, k);
    CHECK(sg.mean_sq[k] + 1.96 * sg.se[k] <= bound * (1.0 + 1e-12));
  }
}
