#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spalf/errors.hpp"
#include "spalf/inversion.hpp"
#include "spalf/montecarlo.hpp"
#include "spalf/step_law.hpp"

using namespace spalf;
using namespace spalf_test;

TEST_CASE("sample_hitting: r = 0 hits immediately") {
  auto results = sample_hitting(d1_pure_death(), {0.0}, 5.0, 20, 1);
  for (const auto& res : results) {
    CHECK(res.all_hit);
    CHECK(res.s[0] == 0.0);
  }
}

TEST_CASE("sample_hitting: Gamma(2,1) mean within 4 stderr") {
  const long long n = 100000;
  auto results = sample_hitting(d1_pure_death(), {2.0}, 60.0, n, 2);
  double sum = 0.0, sumsq = 0.0;
  long long hits = 0;
  for (const auto& res : results)
    if (res.all_hit) {
      sum += res.s[0];
      sumsq += res.s[0] * res.s[0];
      ++hits;
    }
  double mean = sum / hits;
  double se = std::sqrt((sumsq - sum * mean) / (hits - 1) / hits);
  CHECK(std::fabs(mean - 2.0) <= 4.0 * se + 1e-6);
}

TEST_CASE("sample_hitting: row identity and left-limit gap on the lattice") {
  auto results = sample_hitting(d2_coupled(0.5, 0.2), {1.0, 2.0}, 80.0, 2000, 3);
  long long hits = 0;
  for (const auto& res : results) {
    if (!res.all_hit) continue;
    ++hits;
    // row identity held exactly (the sampler asserts it; re-check here)
    for (int i = 0; i < 2; ++i) {
      long long row = 0;
      for (int j = 0; j < 2; ++j) row += res.matrix_units[static_cast<size_t>(i) * 2 + j];
      CHECK(row == -(i == 0 ? 1 : 2));
    }
  }
  CHECK(hits > 1500);
}

TEST_CASE("reproducibility: identical seeds give bit-identical results") {
  ModelSpec m = d2_coupled(0.5, 0.3);
  LaplaceCheck a = verify_laplace_T(m, {1.0, 1.0}, {0.7, 0.9}, 30.0, 20000, 42, 1);
  LaplaceCheck b = verify_laplace_T(m, {1.0, 1.0}, {0.7, 0.9}, 30.0, 20000, 42, 2);
  CHECK(a.mc.mean == b.mc.mean);
  CHECK(a.mc.stderr_ == b.mc.stderr_);
  CHECK(a.mc.censored_fraction == b.mc.censored_fraction);
  LaplaceCheck c = verify_laplace_T(m, {1.0, 1.0}, {0.7, 0.9}, 30.0, 20000, 43, 1);
  CHECK(c.mc.mean != a.mc.mean);
}

TEST_CASE("verify_laplace_T: pure death, E[e^{-T}] = 1/2") {
  LaplaceCheck chk = verify_laplace_T(d1_pure_death(), {1.0}, {1.0}, 30.0, 100000, 7, 2);
  CHECK(chk.pass);
  CHECK(chk.predicted == doctest::Approx(0.5).epsilon(1e-9));  // phibar(1) = ln 2
  CHECK(chk.phibar[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(std::fabs(chk.mc.mean - 0.5) <= 4.0 * chk.mc.stderr_ + chk.bias_bound);
}

TEST_CASE("verify_laplace_T: large lambda decays toward P(T_r = 0) = 0") {
  // E[e^{-20 T_3}] = (1/21)^3 for the Gamma(3,1) passage time
  LaplaceCheck chk = verify_laplace_T(d1_pure_death(), {3.0}, {20.0}, 30.0, 50000, 8, 2);
  CHECK(chk.pass);
  CHECK(chk.mc.mean < 1e-3);
  CHECK(chk.predicted == doctest::Approx(std::pow(1.0 / 21.0, 3)).epsilon(1e-8));
}

TEST_CASE("verify_laplace_T: coupled 2D model") {
  LaplaceCheck chk = verify_laplace_T(d2_coupled(0.5, 0.3), {1.0, 1.0}, {0.8, 0.6}, 40.0, 100000, 9, 2);
  CHECK(chk.pass);
}

TEST_CASE("verify_finiteness") {
  SUBCASE("r = 0: both sides one") {
    FinitenessCheck chk = verify_finiteness(d1_birth_death(2.0 / 3.0), {0.0}, 40.0, 2000, 10, 2);
    CHECK(chk.mc.mean == 1.0);
    CHECK(chk.predicted == 1.0);
    CHECK(chk.pass);
  }
  SUBCASE("supercritical p=2/3: predicted 1/2, monotone from below") {
    FinitenessCheck chk = verify_finiteness(d1_birth_death(2.0 / 3.0), {1.0}, 60.0, 100000, 11, 2);
    CHECK(chk.predicted == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(chk.ladder[0] <= chk.ladder[1]);
    CHECK(chk.ladder[1] <= chk.ladder[2]);
    CHECK(chk.pass);
  }
  SUBCASE("subcritical: predicted 1, mc >= 0.99") {
    FinitenessCheck chk = verify_finiteness(d1_birth_death(0.3), {1.0}, 60.0, 50000, 12, 2);
    CHECK(chk.predicted == doctest::Approx(1.0));
    CHECK(chk.mc.mean >= 0.99);
    CHECK(chk.pass);
  }
}

TEST_CASE("verify_increments") {
  SUBCASE("r' = 0: identical distributions") {
    IncrementsCheck chk = verify_increments(d1_pure_death(), {1.0}, {0.0}, 40.0, 20000, 13, 2);
    CHECK(chk.pass);
  }
  SUBCASE("pure death: Gamma(2) vs sum of exponentials") {
    IncrementsCheck chk = verify_increments(d1_pure_death(), {1.0}, {1.0}, 60.0, 50000, 14, 2);
    CHECK(chk.pass);
    CHECK(chk.p_value[0] > 1e-4);
  }
  SUBCASE("coupled 2D model self-consistency") {
    IncrementsCheck chk = verify_increments(d2_coupled(0.5, 0.2), {1.0, 1.0}, {1.0, 0.0}, 80.0, 50000, 15, 2);
    CHECK(chk.pass);
  }
  SUBCASE("insufficient uncensored samples raise") {
    CHECK_THROWS_AS(verify_increments(d1_birth_death(0.9), {3.0}, {3.0}, 8.0, 1500, 16, 1),
                    spalf::resource_error);
  }
}

TEST_CASE("verify_bivariate_laplace") {
  SUBCASE("mu = 0 reduces to the Laplace check") {
    BivariateCheck chk =
        verify_bivariate_laplace(d1_pure_death(), {1.0}, {1.0}, Mat(1, 1, 0.0), 30.0, 50000, 17, 2);
    CHECK(chk.pass);
    CHECK(chk.predicted == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("d=1 scalar reduction: Phi = phibar(lambda) - mu") {
    ModelSpec m = d1_birth_death(0.4);
    double lambda = 1.3, mu = 0.5;
    BivariateCheck chk = verify_bivariate_laplace(m, {1.0}, {lambda}, Mat(1, 1, mu), 40.0, 100000, 18, 2);
    CHECK(chk.pass);
    ExponentOracle oracle{m};
    double phibar = invert_exponent(oracle, {lambda}).value[0];
    CHECK(chk.big_phi_value[0] == doctest::Approx(phibar - mu).epsilon(1e-8));
  }
  SUBCASE("2D lattice with off-diagonal mass") {
    ModelSpec m = d2_coupled(0.5, 0.2);
    Mat mu(2, 2, 0.0);
    mu(0, 0) = 0.3;
    mu(1, 0) = 0.2;
    mu(0, 1) = 0.1;
    BivariateCheck chk = verify_bivariate_laplace(m, {1.0, 1.0}, {1.0, 0.9}, mu, 40.0, 100000, 19, 2);
    CHECK(chk.pass);
  }
  SUBCASE("membership validation") {
    CHECK_THROWS_AS(
        verify_bivariate_laplace(d1_pure_death(), {1.0}, {0.1}, Mat(1, 1, 3.0), 30.0, 100, 20, 1),
        std::invalid_argument);
  }
}

TEST_CASE("monotone censoring under common random numbers") {
  // P(hit by H) estimates are pathwise nondecreasing in H: the ladder from
  // verify_finiteness uses the same paths at all three horizons.
  FinitenessCheck chk = verify_finiteness(d1_birth_death(2.0 / 3.0), {2.0}, 40.0, 20000, 21, 2);
  CHECK(chk.ladder[0] <= chk.ladder[1]);
  CHECK(chk.ladder[1] <= chk.ladder[2]);
}

TEST_CASE("hitting-time coordinates are dependent (recorded, no contract)") {
  double corr = hitting_correlation(d2_coupled(0.8, 0.0), 1.0, 60.0, 20000, 22, 2);
  CHECK(std::isfinite(corr));
}
