#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spalf/errors.hpp"
#include "spalf/lamperti.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"

using namespace spalf;
using namespace spalf_test;

namespace {

PathBundle sample_driver(const ModelSpec& m, double horizon, std::uint64_t seed, std::uint64_t idx = 0) {
  ModelSampler sampler(m);
  std::mt19937_64 rng = replicate_rng(seed, idx);
  PathBundle b;
  sampler.sample_path(rng, horizon, b);
  return b;
}

}  // namespace

TEST_CASE("r = 0 is absorbed immediately") {
  PathBundle b = sample_driver(d1_pure_death(), 10.0, 1);
  LampertiResult res = solve_lamperti(b, {0.0}, 1e-3, 5.0, 1);
  CHECK(res.extinct);
  CHECK(res.extinction_time == 0.0);
  CHECK(res.load_at_extinction[0] == 0.0);
  HittingResult hit = smallest_solution(b, {0.0});
  CHECK(check_load_identity(res, hit, 1e-12));
}

TEST_CASE("d=1 pure death: load at extinction equals the driver passage time") {
  for (std::uint64_t seed = 2; seed < 12; ++seed) {
    PathBundle b = sample_driver(d1_pure_death(), 40.0, seed);
    double h = 1e-3;
    LampertiResult res = solve_lamperti(b, {1.0}, h, 30.0);
    REQUIRE(res.extinct);
    HittingResult hit = smallest_solution(b, {1.0});
    REQUIRE(hit.all_hit);
    // Z = 1 until the first death epoch tau: L grows at unit speed, overshoot <= h
    CHECK(res.load_at_extinction[0] >= hit.s[0] - 1e-12);
    CHECK(res.load_at_extinction[0] <= hit.s[0] + 2.0 * h);
    CHECK(check_load_identity(res, hit, 2.0 * h));
  }
}

TEST_CASE("invariants along the trajectory") {
  ModelSpec m = d2_coupled(0.4, 0.3);
  PathBundle b = sample_driver(m, 200.0, 5);
  LampertiResult res = solve_lamperti(b, {2.0, 1.0}, 5e-3, 50.0, 1);
  Vec prev_load(2, 0.0);
  for (const auto& s : res.trajectory) {
    for (int i = 0; i < 2; ++i) {
      CHECK(s.z[i] >= 0.0);
      CHECK(s.load[i] >= prev_load[i] - 1e-15);
      prev_load[i] = s.load[i];
    }
  }
  // absorption: once extinct, Z stays 0 (the last recorded state)
  if (res.extinct)
    for (double z : res.trajectory.back().z) CHECK(z == 0.0);
}

TEST_CASE("load-identity error halves when h halves (common driver paths)") {
  std::vector<double> hs = {4e-3, 2e-3, 1e-3};
  std::vector<std::vector<double>> errors(hs.size());
  int used = 0;
  for (std::uint64_t seed = 0; seed < 60 && used < 30; ++seed) {
    PathBundle b = sample_driver(d1_pure_death(1.0), 60.0, 1000 + seed);
    HittingResult hit = smallest_solution(b, {2.0});
    if (!hit.all_hit) continue;
    ++used;
    for (size_t i = 0; i < hs.size(); ++i) {
      LampertiResult res = solve_lamperti(b, {2.0}, hs[i], 50.0);
      REQUIRE(res.extinct);
      errors[i].push_back(std::fabs(res.load_at_extinction[0] - hit.s[0]));
    }
  }
  REQUIRE(used == 30);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double m0 = median(errors[0]), m1 = median(errors[1]), m2 = median(errors[2]);
  CHECK(m1 <= 0.75 * m0);
  CHECK(m2 <= 0.75 * m1);
}

TEST_CASE("subcritical two-type model goes extinct on nearly all seeds") {
  ModelSpec m = d2_coupled(0.3, 0.2);  // mean matrix [[-0.5, 0.3], [0.3, -0.5]], rho = -0.2
  int extinct = 0;
  const int n = 300;
  for (int seed = 0; seed < n; ++seed) {
    PathBundle b = sample_driver(m, 400.0, 7000 + seed);
    LampertiResult res = solve_lamperti(b, {1.0, 1.0}, 1e-2, 200.0);
    extinct += res.extinct ? 1 : 0;
  }
  CHECK(extinct >= static_cast<int>(0.99 * n));
}

TEST_CASE("extinction probability: supercritical p=2/3 gives 1/2") {
  ExtinctionCheck chk = extinction_probability(d1_birth_death(2.0 / 3.0), {1.0}, 60.0, 4000, 31, 1e-2, 200, 2);
  CHECK(chk.predicted == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(chk.pass);
  CHECK(chk.ladder[0] <= chk.ladder[1]);
  CHECK(chk.ladder[1] <= chk.ladder[2]);
}

TEST_CASE("extinction probability: scaling in r") {
  ExtinctionCheck r1 = extinction_probability(d1_birth_death(2.0 / 3.0), {1.0}, 60.0, 4000, 32, 1e-2, 200, 2);
  ExtinctionCheck r2 = extinction_probability(d1_birth_death(2.0 / 3.0), {2.0}, 60.0, 4000, 33, 1e-2, 200, 2);
  CHECK(r2.predicted == doctest::Approx(r1.predicted * r1.predicted).epsilon(1e-8));
  CHECK(r2.pass);
  CHECK(std::fabs(r2.mc.mean - 0.25) <= 4.0 * r2.mc.stderr_ + r2.bias_bound + 0.02);
}

TEST_CASE("extinction monotone in r under a common driver") {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    PathBundle b = sample_driver(d1_birth_death(0.45), 300.0, seed);
    LampertiResult small = solve_lamperti(b, {1.0}, 1e-2, 150.0);
    LampertiResult large = solve_lamperti(b, {3.0}, 1e-2, 150.0);
    if (small.extinct && large.extinct)
      CHECK(large.extinction_time >= small.extinction_time - 1e-9);
    if (!small.extinct) CHECK(!large.extinct);
  }
}

TEST_CASE("resource error when loads escape the driver horizon") {
  PathBundle b = sample_driver(d1_birth_death(0.9), 2.0, 70);
  CHECK_THROWS_AS(solve_lamperti(b, {2.0}, 1e-2, 100.0), spalf::resource_error);
}
