#ifndef SPALF_STEP_LAW_HPP
#define SPALF_STEP_LAW_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "spalf/estimate.hpp"
#include "spalf/model.hpp"
#include "spalf/path.hpp"
#include "spalf/rational.hpp"

namespace spalf {

// Step distribution of a downward-skip-free random field on the k^-1 grid:
// per column a finite table of step vectors (grid units) with exact rational
// probabilities summing to one. Diagonal steps >= -1, off-diagonal steps >= 0.
struct StepLaw {
  struct Entry {
    std::vector<long long> units;
    Rational prob;
  };
  int d = 0;
  int k = 1;
  std::vector<std::vector<Entry>> cols;

  void validate() const;

  // d=1 simple walk on the unit grid: +1 with probability p, -1 otherwise.
  static StepLaw simple_walk(const Rational& p_up);
};

// Realized finite trajectories of the d column walks (per-column step counts n_j).
struct WalkBundle {
  int d = 0;
  int k = 1;
  std::vector<std::vector<int>> steps;  // chosen entry index per step, per column

  // Embeds the walk as a lattice PathBundle with unit-spaced epochs 1..n_j, so the
  // discrete first-hitting definition is the path solver run on this bundle.
  PathBundle embed(const StepLaw& law) const;
};

struct BallotResult {
  Rational lhs;  // P(T_r = n, S_n = x) by exhaustive enumeration
  Rational rhs;  // k^d det(-x) / (n_1...n_d) * P(S_n = x), exact
  bool equal = false;
  long long configurations = 0;
};

// Exact two-sided evaluation of the ballot identity for the matrix level x
// (grid units, essentially nonnegative, x * 1 = -r <= 0). Enumeration work is
// capped by `budget` total step configurations.
BallotResult ballot_exact(const StepLaw& law, const std::vector<int>& n,
                          const std::vector<std::vector<long long>>& x_units, long long budget = 10000000);

// All matrices reachable by (n_1,...,n_d) steps having nonpositive row sums,
// paired with their exact probabilities P(S_n = x). Keys are row-major unit matrices.
std::vector<std::pair<std::vector<long long>, Rational>> reachable_levels(const StepLaw& law,
                                                                          const std::vector<int>& n);

// Poissonization: attaches the walk's steps to d independent Poisson clocks,
// producing a lattice PathBundle on [0, H]. The returned walk holds the step
// sequence so T_r can be cross-checked against the epoch sums of Eq.-style tests.
struct PoissonizedPath {
  PathBundle path;
  std::vector<std::vector<int>> steps;  // per column, law entry index per event
};
PoissonizedPath poissonize(const StepLaw& law, const Vec& rates, double horizon, std::mt19937_64& rng);

// Lattice approximation of a continuous-family model: drift becomes +-1/k Poisson
// streams at rate k|a|, jumps with |delta| >= 1/k are floored to the grid, and a
// Brownian coefficient q becomes +-1/k steps at rate k^2 q / 2 (moment matching).
ModelSpec approximate_levy(const ModelSpec& model, int k);

struct JointLawCheck {
  MCEstimate lhs;          // kernel-smoothed joint density of (T_r, X_{T_r}) at (t, x)
  MCEstimate rhs_prob;     // direct estimate of P(X_t = x)
  double rhs_value = 0.0;  // k^d det(-x) / (t_1...t_d) * rhs_prob.mean
  double rhs_stderr = 0.0;
  double bandwidth = 0.0;
  double smoothing_bias = 0.0;  // two-bandwidth Richardson gap, declared allowance
  bool pass = false;
};

// Monte Carlo check of the lattice joint law
//   P(T_r in dt, X_t = x) = k^d det(-x) / (t_1...t_d) P(X_t = x) dt
// at a fixed (t, x); comparison at 4 combined standard errors plus the declared
// smoothing allowance.
JointLawCheck discrete_joint_law_check(const ModelSpec& model, const Vec& r, const Vec& t,
                                       const std::vector<std::vector<long long>>& x_units, long long n_samples,
                                       double bandwidth, std::uint64_t seed, int workers = 1);

// Randomized ballot instance generator for the property sweeps.
StepLaw random_step_law(std::mt19937_64& rng, int d, int k, int max_support = 4, int max_weight = 6);

}  // namespace spalf

#endif
