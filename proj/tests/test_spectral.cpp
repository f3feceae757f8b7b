#include <doctest.h>

#include <string>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "langevin/integrator.hpp"
#include "langevin/potential.hpp"
#include "langevin/spectral.hpp"

using namespace langevin;

namespace {

struct ZeroForceSpec final : GradientSource {
  void eval(std::span<const double>, std::span<double> g) override {
    std::fill(g.begin(), g.end(), 0.0);
    ++evals_;
  }
};

}  // namespace

TEST_CASE("mode matrix: EM hand value") {
  auto p = IntegratorParams::kinetic(0.1, 2.0);
  auto P = mode_matrix(Scheme::em, 1.0, p);
  CHECK(P.a11 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(P.a12 == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(P.a21 == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(P.a22 == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("mode matrix: close to identity at tiny stepsize") {
  const double h = 1e-6, gamma = 3.0, lambda = 10.0;
  auto p = IntegratorParams::kinetic(h, gamma);
  const double budget = 3.0 * (1.0 + lambda + gamma) * h;
  for (Scheme s : kKineticSchemes) {
    if (s == Scheme::roabao) continue;
    const std::string tag = to_string(s);
    CAPTURE(tag);
    auto P = mode_matrix(s, lambda, p);
    Mat2 dev{P.a11 - 1.0, P.a12, P.a21, P.a22 - 1.0};
    CHECK(dev.frobenius() < budget);
  }
  auto R = mode_matrix_roabao(lambda, p, 0.5 * h);
  Mat2 dev{R.a11 - 1.0, R.a12, R.a21, R.a22 - 1.0};
  CHECK(dev.frobenius() < budget);
}

TEST_CASE("mode matrix: BAOAB literal five-factor product") {
  const double h = 0.08, gamma = 2.5, lambda = 4.0;
  auto p = IntegratorParams::kinetic(h, gamma);
  auto P = mode_matrix(Scheme::baoab, lambda, p);

  const Mat2 B{1.0, 0.0, -0.5 * h * lambda, 1.0};
  const Mat2 A{1.0, 0.5 * h, 0.0, 1.0};
  const Mat2 O{1.0, 0.0, 0.0, std::exp(-gamma * h)};
  Mat2 want = B * (A * (O * (A * B)));
  CHECK(P.a11 == doctest::Approx(want.a11).epsilon(1e-14));
  CHECK(P.a12 == doctest::Approx(want.a12).epsilon(1e-14));
  CHECK(P.a21 == doctest::Approx(want.a21).epsilon(1e-14));
  CHECK(P.a22 == doctest::Approx(want.a22).epsilon(1e-14));
}

TEST_CASE("mode matrix: guards") {
  auto p = IntegratorParams::kinetic(0.1, 2.0);
  CHECK_THROWS_AS(mode_matrix(Scheme::em, 0.0, p), std::invalid_argument);
  CHECK_THROWS_AS(mode_matrix(Scheme::roabao, 1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(mode_matrix(Scheme::od_em, 1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(mode_matrix_roabao(1.0, p, 0.2), std::invalid_argument);
  CHECK(mode_factor_overdamped(3.0, 0.1) == doctest::Approx(0.7));
}

TEST_CASE("mode matrix agrees with one zero-noise integrator step") {
  // The coupled-difference map and the sampler kernel are maintained
  // separately; a shared-noise step of two chains must reproduce P * dz.
  const double lambda = 2.5, h = 0.07, gamma = 3.0;
  auto pot = gaussian_potential({lambda});
  auto p = IntegratorParams::kinetic(h, gamma);

  auto diff_after = [&](Scheme s, double u) {
    PotentialGradient ga(*pot), gb(*pot);
    IntegratorState a(PhaseState{{0.7}, {-0.3}});
    IntegratorState b(PhaseState{{0.2}, {0.5}});
    if (s == Scheme::bbk) {
      a.noise_cache.assign(1, 0.0);
      b.noise_cache.assign(1, 0.0);
    }
    auto quiet = zero_step_noise(s, 1, p, u);
    step_with_noise(s, a, ga, p, quiet);
    step_with_noise(s, b, gb, p, quiet);
    return std::pair<double, double>{a.z.x[0] - b.z.x[0], a.z.v[0] - b.z.v[0]};
  };

  const double dx0 = 0.5, dv0 = -0.8;
  for (Scheme s : kKineticSchemes) {
    const std::string tag = to_string(s);
    CAPTURE(tag);
    const double u = 0.03;
    Mat2 P = (s == Scheme::roabao) ? mode_matrix_roabao(lambda, p, u)
                                   : mode_matrix(s, lambda, p);
    auto [dx, dv] = diff_after(s, u);
    CHECK(dx == doctest::Approx(P.a11 * dx0 + P.a12 * dv0).epsilon(1e-10));
    CHECK(dv == doctest::Approx(P.a21 * dx0 + P.a22 * dv0).epsilon(1e-10));
  }
}

TEST_CASE("max_eig_modulus: real and complex branches") {
  CHECK(max_eig_modulus({2.0, 0.0, 0.0, -3.0}) == doctest::Approx(3.0));
  // Rotation scaled by r: complex pair of modulus r.
  const double r = 0.8, c = r * std::cos(1.0), s = r * std::sin(1.0);
  CHECK(max_eig_modulus({c, -s, s, c}) == doctest::Approx(r).epsilon(1e-14));
}

TEST_CASE("spectral gap: EM double root at the matched point") {
  auto p = IntegratorParams::kinetic(0.1, 2.0);
  auto sg = spectral_gap(Scheme::em, 1.0, 1.0, p);
  CHECK(sg.max_modulus == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(sg.gap == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(!sg.divergent);
}

TEST_CASE("spectral gap: EM at h = 1 is divergent") {
  auto p = IntegratorParams::kinetic(1.0, 2.0);
  auto sg = spectral_gap(Scheme::em, 1.0, 10.0, p);
  CHECK(sg.divergent);
  CHECK(sg.max_modulus >= 1.0);
  CHECK(sg.gap <= 0.0);
}

TEST_CASE("spectral gap: rejects rOABAO and bad ranges") {
  auto p = IntegratorParams::kinetic(0.1, 2.0);
  CHECK_THROWS_AS(spectral_gap(Scheme::roabao, 1.0, 10.0, p), std::invalid_argument);
  CHECK_THROWS_AS(spectral_gap(Scheme::em, 0.0, 10.0, p), std::invalid_argument);
  CHECK_THROWS_AS(spectral_gap(Scheme::em, 2.0, 1.0, p), std::invalid_argument);
}

TEST_CASE("gap/h converges to the continuous decay rate as h -> 0") {
  const double m = 1.0, M = 10.0, gamma = 3.0;
  const double want = continuous_rate(m, M, gamma);
  CHECK(want == doctest::Approx(0.5 * (gamma - std::sqrt(gamma * gamma - 4.0 * m))));

  auto rate_at = [&](double h) {
    auto sg = spectral_gap(Scheme::em, m, M, IntegratorParams::kinetic(h, gamma));
    return sg.gap / h;
  };
  const double r4 = rate_at(1e-4), r5 = rate_at(1e-5);
  CHECK(std::abs(r4 - r5) / r5 < 0.01);  // Richardson-style stability
  CHECK(r5 == doctest::Approx(want).epsilon(0.02));

  // The same limit holds for the other exact-map schemes.
  for (Scheme s : {Scheme::bbk, Scheme::spv, Scheme::baoab, Scheme::ses}) {
    auto sg = spectral_gap(s, m, M, IntegratorParams::kinetic(1e-5, gamma));
    const std::string tag = to_string(s);
    CAPTURE(tag);
    CHECK(sg.gap / 1e-5 == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("interior modes never beat the extreme ones") {
  auto p = IntegratorParams::kinetic(0.05, 8.0);
  for (Scheme s : kKineticSchemes) {
    if (s == Scheme::roabao) continue;
    const std::string tag = to_string(s);
    CAPTURE(tag);
    const double worst =
        std::max(mode_modulus(s, 1.0, p), mode_modulus(s, 10.0, p));
    for (double lambda : {2.5, 5.0, 7.5}) {
      CHECK(mode_modulus(s, lambda, p) <= worst + 1e-12);
    }
  }
}

TEST_CASE("large-friction contours are parallel: halving gamma doubles the gap") {
  const double m = 1.0, M = 10.0, h = 1e-3, gamma = 200.0;
  for (Scheme s : {Scheme::bbk, Scheme::spv, Scheme::svv}) {
    const std::string tag = to_string(s);
    CAPTURE(tag);
    auto g1 = spectral_gap(s, m, M, IntegratorParams::kinetic(h, gamma));
    auto g2 = spectral_gap(s, m, M, IntegratorParams::kinetic(h, 2.0 * gamma));
    const double factor = g1.gap / g2.gap;
    CHECK(factor >= 1.7);
    CHECK(factor <= 2.3);
  }
}

TEST_CASE("lyapunov estimator: forced midpoint reproduces the fixed-matrix modulus") {
  const double m = 1.0, M = 10.0;
  auto p = IntegratorParams::kinetic(0.05, 13.0);
  const double want = std::max(max_eig_modulus(mode_matrix_roabao(m, p, 0.025)),
                               max_eig_modulus(mode_matrix_roabao(M, p, 0.025)));
  auto est = lyapunov_rate_roabao(m, M, p, 5000000, 2, 4, 0.025);
  CHECK(est.rate == doctest::Approx(want).epsilon(1e-6));
  CHECK(est.ci_half_width == doctest::Approx(0.0));  // deterministic product
}

TEST_CASE("lyapunov estimator: tiny stepsize sits just under one, tight CI") {
  const double gamma = 13.0;
  auto p = IntegratorParams::kinetic(1e-4, gamma);
  auto est = lyapunov_rate_roabao(1.0, 10.0, p, 20000, 8, 9);
  CHECK(est.rate <= 1.0);
  CHECK(est.rate >= 1.0 - 10.0 * gamma * p.h);
  CHECK(est.ci_half_width < 1e-3);
  CHECK(est.replicas == 8);
}

TEST_CASE("contour grid: a 1x1 grid is spectral_gap in disguise") {
  ContourOptions opts;
  opts.gamma_points = 1;
  opts.h_points = 1;
  auto grid = contour_grid(Scheme::em, 1.0, 10.0, 3.0, 3.0, 0.01, 0.01, opts);
  REQUIRE(grid.cells.size() == 1);
  auto sg = spectral_gap(Scheme::em, 1.0, 10.0, IntegratorParams::kinetic(0.01, 3.0));
  CHECK(grid.cells[0].value == doctest::Approx(std::log(sg.max_modulus / 0.01)).epsilon(1e-14));
  CHECK(grid.cells[0].divergent == sg.divergent);
  CHECK(grid.cells[0].ci == 0.0);
}

TEST_CASE("contour grid: axes are log-spaced with exact endpoints") {
  ContourOptions opts;
  opts.gamma_points = 5;
  opts.h_points = 4;
  auto grid = contour_grid(Scheme::baoab, 1.0, 10.0, 1.0, 16.0, 0.01, 0.08, opts);
  CHECK(grid.gammas.front() == 1.0);
  CHECK(grid.gammas.back() == 16.0);
  CHECK(grid.gammas[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(grid.hs.front() == 0.01);
  CHECK(grid.hs.back() == 0.08);
  CHECK(grid.cells.size() == 20);
  // Row-major over (gamma, h).
  CHECK(grid.cells[0].gamma == grid.gammas[0]);
  CHECK(grid.cells[1].h == doctest::Approx(grid.hs[1]));
  CHECK(grid.cells[4].gamma == doctest::Approx(grid.gammas[1]));
}

TEST_CASE("contour grid: EM has more divergent cells than BAOAB") {
  ContourOptions opts;
  opts.gamma_points = 8;
  opts.h_points = 8;
  auto count = [&](Scheme s) {
    auto grid = contour_grid(s, 1.0, 10.0, 1.0, 40.0, 0.01, 1.0, opts);
    int n = 0;
    for (const auto& cell : grid.cells) n += cell.divergent ? 1 : 0;
    return n;
  };
  const int em = count(Scheme::em), baoab = count(Scheme::baoab);
  CHECK(em > baoab);
  CHECK(em > 0);
}

TEST_CASE("contour grid: quadratic rescaling shifts values by exactly ln 2") {
  // (m, M, gamma, h) -> (4m, 4M, 2 gamma, h/2) is a similarity of every mode
  // map, so rho is unchanged and ln(rho/h) gains ln 2.
  ContourOptions opts;
  opts.gamma_points = 3;
  opts.h_points = 3;
  for (Scheme s : {Scheme::em, Scheme::baoab, Scheme::ses}) {
    const std::string tag = to_string(s);
    CAPTURE(tag);
    auto base = contour_grid(s, 1.0, 10.0, 2.0, 20.0, 0.01, 0.1, opts);
    auto scaled = contour_grid(s, 4.0, 40.0, 4.0, 40.0, 0.005, 0.05, opts);
    for (std::size_t i = 0; i < base.cells.size(); ++i) {
      CHECK(scaled.cells[i].value ==
            doctest::Approx(base.cells[i].value + std::log(2.0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("contour grid: rejects overdamped schemes and bad axes") {
  ContourOptions opts;
  CHECK_THROWS_AS(contour_grid(Scheme::od_em, 1.0, 10.0, 1.0, 2.0, 0.1, 0.2, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(contour_grid(Scheme::em, 1.0, 10.0, 2.0, 1.0, 0.1, 0.2, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(contour_grid(Scheme::em, 1.0, 10.0, 0.0, 1.0, 0.1, 0.2, opts),
                  std::invalid_argument);
}
