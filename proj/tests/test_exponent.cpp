#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "spalf/inversion.hpp"
#include "spalf/model.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"

using namespace spalf;
using namespace spalf_test;

namespace {

ExponentOracle brownian2d() { return ExponentOracle{example2d_model(-1.0, -1.0, 0.5, 0.5, 1.0, 1.0)}; }

ModelSpec random_model(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat drift(d, d);
  Vec q(d);
  std::vector<std::vector<JumpComponent>> jumps(d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) drift(i, j) = i == j ? -2.0 * unif(rng) - 0.2 : 0.4 * unif(rng);
    q[j] = unif(rng) < 0.5 ? 0.0 : 0.5 + unif(rng);
    int nj = 1 + static_cast<int>(unif(rng) * 2);
    for (int c = 0; c < nj; ++c) {
      Vec delta(d);
      for (int i = 0; i < d; ++i) delta[i] = i == j ? unif(rng) : 0.5 * unif(rng);
      jumps[j].push_back(jump(0.2 + unif(rng), delta));
    }
  }
  return ModelSpec::continuous(drift, q, jumps);
}

}  // namespace

TEST_CASE("phi vanishes at the origin") {
  auto models = {example2d_model(-1, -1, 0.5, 0.5, 1, 1), d1_drift_jump(), d1_brownian(1.0, 1.0)};
  for (const auto& m : models) {
    ExponentOracle oracle{m};
    Vec phi = oracle.eval(Vec(m.d, 0.0));
    for (double v : phi) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("2D Brownian example exponent value") {
  ExponentOracle oracle = brownian2d();
  Vec phi = oracle.eval({1.0, 1.0});
  CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(phi[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("drift-plus-jump exponent at 1") {
  ExponentOracle oracle{d1_drift_jump()};
  // phi(1) = 1 - (1 - e^{-1}) = e^{-1}
  CHECK(oracle.eval({1.0})[0] == doctest::Approx(0.3678794411714423).epsilon(1e-14));
}

TEST_CASE("Jacobian convention and mean matrix") {
  ExponentOracle oracle = brownian2d();
  Mat J0 = oracle.mean_matrix();
  CHECK(J0(0, 0) == doctest::Approx(-1.0));
  CHECK(J0(0, 1) == doctest::Approx(0.5));
  CHECK(J0(1, 0) == doctest::Approx(0.5));
  CHECK(J0(1, 1) == doctest::Approx(-1.0));

  // J(lambda)_{j,j} = -d phi_j/d lambda_j = a_{jj} - q_j lambda_j (the Esscher-tilted
  // mean: tilting by mu shifts the diagonal drift by -q_j mu_j).
  Mat J2 = oracle.jacobian({2.0, 2.0});
  CHECK(J2(0, 0) == doctest::Approx(-3.0));
  CHECK(J2(0, 1) == doctest::Approx(0.5));
  CHECK(J2(1, 0) == doctest::Approx(0.5));
  CHECK(J2(1, 1) == doctest::Approx(-3.0));

  ExponentOracle zero_mean{d1_drift_jump()};
  CHECK(zero_mean.mean_matrix()(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("Jacobian agrees with central finite differences") {
  std::mt19937_64 rng = replicate_rng(7, 0);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int d : {1, 2, 3}) {
    ModelSpec m = random_model(rng, d);
    ExponentOracle oracle{m};
    for (int rep = 0; rep < 10; ++rep) {
      Vec lambda(d);
      for (double& v : lambda) v = unif(rng);
      Mat J = oracle.jacobian(lambda);
      for (int i = 0; i < d; ++i) {
        double h = 1e-6 * (1.0 + lambda[i]);
        Vec lp = lambda, lm = lambda;
        lp[i] += h;
        lm[i] -= h;
        Vec fp = oracle.eval(lp), fm = oracle.eval(lm);
        for (int j = 0; j < d; ++j) {
          double fd = -(fp[j] - fm[j]) / (2.0 * h);
          CHECK(J(i, j) == doctest::Approx(fd).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("convexity and cross-coordinate monotonicity by sampling") {
  std::mt19937_64 rng = replicate_rng(11, 0);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  ModelSpec m = random_model(rng, 2);
  ExponentOracle oracle{m};
  for (int rep = 0; rep < 200; ++rep) {
    Vec a = {unif(rng), unif(rng)}, b = {unif(rng), unif(rng)};
    double t = tdist(rng);
    Vec mid = {t * a[0] + (1 - t) * b[0], t * a[1] + (1 - t) * b[1]};
    Vec fa = oracle.eval(a), fb = oracle.eval(b), fm = oracle.eval(mid);
    double scale = 1.0 + std::fabs(fa[0]) + std::fabs(fb[0]) + std::fabs(fa[1]) + std::fabs(fb[1]);
    for (int j = 0; j < 2; ++j) CHECK(fm[j] <= t * fa[j] + (1 - t) * fb[j] + 1e-12 * scale);
  }
  // phi_j non-increasing in lambda_i, i != j
  for (double base : {0.2, 1.0, 2.5}) {
    for (double step : {0.3, 0.9}) {
      Vec lo = {base, base}, hi = {base + step, base};
      CHECK(oracle.eval(hi)[1] <= oracle.eval(lo)[1] + 1e-12);
      Vec hi2 = {base, base + step};
      CHECK(oracle.eval(hi2)[0] <= oracle.eval(lo)[0] + 1e-12);
    }
  }
}

TEST_CASE("Esscher shift identities") {
  SUBCASE("zero shift is the identity") {
    ExponentOracle oracle = brownian2d();
    ExponentOracle same = oracle.esscher(Mat(2, 2, 0.0));
    for (double x : {0.0, 0.7, 2.3}) {
      Vec phi0 = oracle.eval({x, 1.0}), phi1 = same.eval({x, 1.0});
      CHECK(phi0[0] == doctest::Approx(phi1[0]).epsilon(1e-15));
      CHECK(phi0[1] == doctest::Approx(phi1[1]).epsilon(1e-15));
    }
  }
  SUBCASE("d=1 jump model, mu = ln 2 halves the rate") {
    ExponentOracle oracle{d1_drift_jump()};
    double mu = std::log(2.0);
    ExponentOracle tilted = oracle.esscher(Mat(1, 1, mu));
    for (double lam : {0.1, 0.5, 1.0, 3.0}) {
      double expected = lam - 0.5 * (1.0 - std::exp(-lam));
      CHECK(tilted.eval({lam})[0] == doctest::Approx(expected).epsilon(1e-13));
    }
    // tilted sampling model has rate 1/2
    ModelSpec tilted_model = oracle.esscher_model(Mat(1, 1, mu));
    CHECK(tilted_model.jumps[0][0].rate == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("2D Brownian example, both shift columns (1,1)") {
    ExponentOracle oracle = brownian2d();
    ExponentOracle tilted = oracle.esscher(Mat(2, 2, 1.0));
    for (double l1 : {0.0, 0.5, 2.0})
      for (double l2 : {0.0, 1.0}) {
        double expected = -0.5 * l2 + 2.0 * l1 + 0.5 * l1 * l1;
        CHECK(tilted.eval({l1, l2})[0] == doctest::Approx(expected).epsilon(1e-13));
      }
  }
  SUBCASE("shift consistency against direct evaluation") {
    std::mt19937_64 rng = replicate_rng(23, 0);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    ModelSpec m = random_model(rng, 2);
    ExponentOracle oracle{m};
    Mat mu(2, 2);
    for (double& v : mu.a) v = unif(rng);
    ExponentOracle tilted = oracle.esscher(mu);
    for (int rep = 0; rep < 50; ++rep) {
      Vec lambda = {unif(rng), unif(rng)};
      Vec lhs = tilted.eval(lambda);
      for (int j = 0; j < 2; ++j) {
        Vec shifted = lambda;
        for (int i = 0; i < 2; ++i) shifted[i] += mu(i, j);
        double rhs = oracle.eval(shifted)[j] - oracle.eval(mu.column(j))[j];
        CHECK(lhs[j] == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }
  SUBCASE("tilted model realizes the shifted exponent") {
    ExponentOracle oracle{ModelSpec::continuous(Mat(1, 1, -0.5), {1.3}, {{jump(0.7, {0.8})}})};
    Mat mu(1, 1, 0.9);
    ModelSpec tilted_model = oracle.esscher_model(mu);
    ExponentOracle direct{tilted_model};
    ExponentOracle shifted = oracle.esscher(mu);
    for (double lam : {0.0, 0.4, 1.7})
      CHECK(direct.eval({lam})[0] == doctest::Approx(shifted.eval({lam})[0]).epsilon(1e-12));
  }
}

TEST_CASE("special product") {
  CHECK(special_product(Mat::identity(2), Mat::identity(2)) == doctest::Approx(2.0));
  CHECK(special_product(Mat(2, 2, 1.0), Mat{{1, 2}, {3, 4}}) == doctest::Approx(10.0));
  Mat scaled = Mat::identity(2);
  for (double& v : scaled.a) v *= 3.0;
  CHECK(special_product(scaled, Mat::identity(2)) == doctest::Approx(6.0));
  CHECK_THROWS_AS(special_product(Mat(2, 2), Mat(3, 3)), std::invalid_argument);
}

TEST_CASE("argument validation") {
  ExponentOracle oracle = brownian2d();
  CHECK_THROWS_AS(oracle.eval({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(oracle.eval({-0.1, 0.0}), std::invalid_argument);
  Mat neg(2, 2, 0.0);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(oracle.esscher(neg), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::continuous(Mat{{-1, -0.2}, {0.1, -1}}, {1, 1}, {{}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::continuous(Mat(1, 1, -1.0), {-0.5}, {{}}), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::continuous(Mat(1, 1, -1.0), {0.0}, {{jump(1.0, {-0.2})}}), std::invalid_argument);
  // lattice family: no diffusion, grid jumps only
  CHECK_THROWS_AS(ModelSpec::lattice(2, Mat(1, 1, 0.0), {{jump(1.0, {0.3})}}), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::lattice(2, Mat(1, 1, 0.0), {{lattice_jump(1.0, {-2})}}), std::invalid_argument);
}

TEST_CASE("lattice Monte Carlo matches the exponent") {
  // E[e^{-<lambda, X^{(j)}_t>}] = e^{t phi_j(lambda)} within 4 standard errors.
  ModelSpec m = d2_coupled(0.5, 0.3);
  ExponentOracle oracle{m};
  ModelSampler sampler(m);
  const double t = 1.7;
  const Vec lambda = {0.8, 0.6};
  const long long n = 100000;
  for (int j = 0; j < 2; ++j) {
    double sum = 0.0, sumsq = 0.0;
    for (long long rep = 0; rep < n; ++rep) {
      std::mt19937_64 rng = replicate_rng(31, rep, j);
      std::vector<long long> units;
      sampler.sample_matrix_at(rng, {t, t}, units);
      double e = 0.0;
      for (int i = 0; i < 2; ++i) e += lambda[i] * static_cast<double>(units[static_cast<size_t>(i) * 2 + j]);
      double v = std::exp(-e);
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sumsq - sum * mean) / (n - 1) / n);
    double predicted = std::exp(t * oracle.eval(lambda)[j]);
    CHECK(std::fabs(mean - predicted) <= 4.0 * se);
  }
}
