#ifndef SPALF_LAMPERTI_HPP
#define SPALF_LAMPERTI_HPP

#include <cstdint>
#include <vector>

#include "spalf/estimate.hpp"
#include "spalf/model.hpp"
#include "spalf/path.hpp"
#include "spalf/solver.hpp"

namespace spalf {

struct BranchingState {
  double t = 0.0;
  Vec z;       // population per type, >= 0, absorbed at 0
  Vec load;    // L_j(t) = integral of Z^{(j)} up to t, nondecreasing
  bool extinct = false;
};

struct LampertiResult {
  std::vector<BranchingState> trajectory;  // recorded every `record_stride` steps
  bool extinct = false;
  double extinction_time = 0.0;
  Vec load_at_extinction;
  Vec z_final;
  long long steps = 0;
};

// Explicit Euler on the loads of the multitype Lamperti equation
//   Z_t = r + row sums of the field evaluated at L(t),  L_j' = Z^{(j)}.
// Lattice drivers only; Z is clamped at 0 and extinction declared when every
// coordinate is within half a grid cell of 0 with nonpositive defining row sums.
// Loads beyond the driver horizon raise a resource error.
LampertiResult solve_lamperti(const PathBundle& paths, const Vec& r, double h, double t_max,
                              long long record_stride = 0);

// Operational reading of the pathwise determination: loads at extinction equal
// the first-passage time of the driving field, coordinatewise within tol.
bool check_load_identity(const LampertiResult& trajectory, const HittingResult& hitting, double tol);

struct ExtinctionCheck {
  MCEstimate mc;                 // extinction frequency by t_max
  std::vector<double> ladder;    // extinct by t_max/4, t_max/2, t_max (common random numbers)
  double predicted = 0.0;        // exp(-<phi0, r>)
  double bias_bound = 0.0;
  bool pass = false;
};
// Monte Carlo extinction frequency against exp(-<phi(0), r>); survivors are
// declared once the population exceeds `escape_units` grid units above zero
// (the conditional extinction probability beyond that level is negligible for
// the supercritical suites this is used on).
ExtinctionCheck extinction_probability(const ModelSpec& model, const Vec& r, double t_max, long long n,
                                       std::uint64_t seed, double h = 1e-2, long long escape_units = 200,
                                       int workers = 1);

}  // namespace spalf

#endif
