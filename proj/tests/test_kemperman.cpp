#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spalf/inversion.hpp"
#include "spalf/kemperman.hpp"
#include "spalf/montecarlo.hpp"
#include "spalf/numerics.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"
#include "spalf/solver.hpp"
#include "spalf/step_law.hpp"

using namespace spalf;
using namespace spalf_test;

TEST_CASE("d=1 analytic Kemperman equals the inverse-Gaussian density") {
  // a = -1, q = 1, r = 1, t = 1: f(1) = (1/1) N(-1; -1, 1) = 1/sqrt(2 pi)
  auto rows = kemperman_d1_analytic(-1.0, 1.0, 1.0, {1.0});
  CHECK(rows[0].kemperman == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(rows[0].inverse_gaussian == doctest::Approx(rows[0].kemperman).epsilon(1e-12));

  Vec grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
  for (auto [a, q, r] : {std::tuple{-1.0, 1.0, 1.0}, {-0.5, 2.0, 1.5}, {1.0, 1.0, 1.0}, {-2.0, 0.7, 0.4}, {0.3, 1.3, 2.0}}) {
    for (const auto& row : kemperman_d1_analytic(a, q, r, grid))
      CHECK(std::fabs(row.kemperman - row.inverse_gaussian) <= 1e-10 * (1.0 + row.kemperman));
  }
}

TEST_CASE("d=1 total mass: 1 when a < 0, e^{-2ar/q} when a > 0") {
  CHECK(first_passage_mass(-1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(first_passage_mass(-0.5, 2.0, 1.5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(first_passage_mass(1.0, 1.0, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
  CHECK(first_passage_mass(0.7, 1.2, 0.8) == doctest::Approx(std::exp(-2.0 * 0.7 * 0.8 / 1.2)).epsilon(1e-6));
}

TEST_CASE("Levy measure d=1: density values and exponent quadrature") {
  SUBCASE("a = 0 is the 1/2-stable subordinator") {
    LevyMeasureReport rep = levy_measure_d1(0.0, 1.0, {1.0}, {0.1, 0.5, 1.0, 2.0, 5.0, 10.0});
    CHECK(rep.density[0].second == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
    for (auto [lambda, quad, closed] : rep.exponent_check) {
      CHECK(closed == doctest::Approx(std::sqrt(2.0 * lambda)).epsilon(1e-12));
      CHECK(std::fabs(quad - closed) <= 1e-5);
    }
  }
  SUBCASE("a = -1: phibar(lambda) = sqrt(1 + 2 lambda) - 1") {
    LevyMeasureReport rep = levy_measure_d1(-1.0, 1.0, {0.5, 1.0}, {0.1, 0.3, 1.0, 3.0, 10.0});
    for (auto [lambda, quad, closed] : rep.exponent_check) {
      CHECK(closed == doctest::Approx(std::sqrt(1.0 + 2.0 * lambda) - 1.0).epsilon(1e-12));
      CHECK(std::fabs(quad - closed) <= 1e-5);
    }
    CHECK(rep.max_error <= 1e-5);
  }
  SUBCASE("large-t Gaussian envelope") {
    LevyMeasureReport rep = levy_measure_d1(-1.0, 1.0, {1.0, 5.0, 10.0, 20.0}, {1.0});
    for (auto [t, nu] : rep.density) CHECK(nu <= std::exp(-t / 2.0) + 1e-15);
  }
}

TEST_CASE("first-passage density formula") {
  SUBCASE("d=1 reduction equals the analytic identity") {
    double a = -1.0, q = 1.0, r = 1.0;
    PointMassOffdiag spec;
    spec.offdiag_slopes = Mat(1, 1, 0.0);
    spec.diag_density = [&](int, double y, double t) { return normal_pdf(y, a * t, q * t); };
    for (double t : {0.4, 1.0, 2.7}) {
      double via_formula = first_passage_density_point_mass(spec, {r}, {t});
      double analytic = kemperman_d1_analytic(a, q, r, {t})[0].kemperman;
      CHECK(via_formula == doctest::Approx(analytic).epsilon(1e-13));
      auto p = [&](const Mat& xhat) { return normal_pdf(xhat(0, 0), a * t, q * t); };
      CHECK(first_passage_density_quadrature(1, p, {r}, {t}, 0.0) == doctest::Approx(analytic).epsilon(1e-13));
    }
  }
  SUBCASE("determinant vanishes at r = 0") {
    PointMassOffdiag spec;
    spec.offdiag_slopes = Mat{{0.0, 0.5}, {0.5, 0.0}};
    spec.diag_density = [](int, double, double) { return 1.0; };
    CHECK(first_passage_density_point_mass(spec, {0.0, 0.0}, {1.0, 2.0}) == doctest::Approx(0.0));
  }
  SUBCASE("2D point-mass mode cross-checked against lattice Monte Carlo") {
    // 2D Brownian example through the k = 50 lattice approximation; kernel-smoothed
    // density of T_r at an interior point.
    double a1 = -1.0, a2 = -1.0, a12 = 0.5, a21 = 0.5, q1 = 1.0, q2 = 1.0;
    Vec r = {0.5, 0.5};
    Vec t = {0.6, 0.7};
    PointMassOffdiag spec;
    spec.offdiag_slopes = Mat{{0.0, a12}, {a21, 0.0}};
    spec.diag_density = [&](int i, double y, double ti) {
      return normal_pdf(y, (i == 0 ? a1 : a2) * ti, (i == 0 ? q1 : q2) * ti);
    };
    double formula = first_passage_density_point_mass(spec, r, t);

    ModelSpec lat = approximate_levy(example2d_model(a1, a2, a12, a21, q1, q2), 50);
    ModelSampler sampler(lat);
    const long long n = 200000;
    const double w = 0.25;
    double sum = 0.0, sumsq = 0.0;
    PathBundle ws;
    for (long long rep = 0; rep < n; ++rep) {
      std::mt19937_64 rng = replicate_rng(1234, rep);
      sampler.sample_path(rng, t[0] + t[1] + 2.0, ws);
      HittingResult hit = smallest_solution(ws, r);
      double v = 0.0;
      if (hit.all_hit && std::fabs(hit.s[0] - t[0]) <= 0.5 * w && std::fabs(hit.s[1] - t[1]) <= 0.5 * w)
        v = 1.0 / (w * w);
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sumsq - sum * mean) / (n - 1) / n);
    // 4 stderr + declared smoothing/lattice allowance
    CHECK(std::fabs(mean - formula) <= 4.0 * se + 0.15 * formula);
  }
}

TEST_CASE("Kemperman theorem: d=1 pure death, closed-form target") {
  ModelSpec m = d1_pure_death();
  Vec alpha = {1.0}, lambda = {1.0};
  KempermanCheck chk = verify_kemperman_theorem(m, alpha, lambda, Mat(1, 1, 0.0), 30.0, 200000, 51, {}, 2);
  CHECK(chk.pass);
  // Phi(lambda, 0) = phibar(lambda) = ln 2 at lambda = 1
  CHECK(chk.big_phi_value[0] == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  double x = 1.0 + std::log(2.0);
  double disc = std::exp(-x) / (1.0 - std::exp(-x));
  CHECK(chk.product_discrete == doctest::Approx(disc).epsilon(1e-10));
  CHECK(chk.product_limit == doctest::Approx(1.0 / (1.0 + std::log(2.0))).epsilon(1e-10));
  CHECK(chk.negative_determinants == 0);
}

TEST_CASE("Kemperman theorem: d=1 with exponential tilt (mu > 0)") {
  ModelSpec m = d1_birth_death(0.35, 2);
  Mat mu(1, 1, 0.4);
  KempermanCheck chk = verify_kemperman_theorem(m, {0.8}, {1.1}, mu, 40.0, 200000, 52, {}, 2);
  CHECK(chk.pass);
  CHECK(chk.pass_limit_form);
}

TEST_CASE("Kemperman theorem: d=2 coupled model") {
  ModelSpec m = d2_coupled(0.5, 0.2);
  Mat mu(2, 2, 0.0);
  mu(0, 1) = 0.2;
  mu(1, 1) = 0.1;
  TSampler ts;
  ts.kind = TSampler::Kind::sqrt_gamma;
  KempermanCheck chk = verify_kemperman_theorem(m, {1.0, 1.2}, {1.0, 0.9}, mu, 40.0, 200000, 53, ts, 2);
  CHECK(chk.pass);
  CHECK(chk.negative_determinants == 0);
  CHECK(chk.ess_rhs >= 200000.0 / 100.0);
}

TEST_CASE("Kemperman theorem: argument validation") {
  ModelSpec m = d1_pure_death();
  CHECK_THROWS_AS(verify_kemperman_theorem(m, {0.0}, {1.0}, Mat(1, 1, 0.0), 10.0, 100, 1, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(verify_kemperman_theorem(m, {1.0}, {0.1}, Mat(1, 1, 5.0), 10.0, 100, 1, {}, 1), std::invalid_argument);
}
