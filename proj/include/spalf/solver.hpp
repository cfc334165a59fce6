#ifndef SPALF_SOLVER_HPP
#define SPALF_SOLVER_HPP

#include <vector>

#include "spalf/path.hpp"

namespace spalf {

enum class HitStatus { hit, infinite, censored };

// Outcome of the smallest-solution iteration for the system
//   r_i + sum_j x^{i,j}(s_j) = 0,  i in [d]_s.
// Lattice paths are read right-continuously (a hit lands exactly on the grid level);
// continuous-family paths are read at left limits, matching the two conventions of
// the underlying theory. Coordinates unresolved within the horizon are censored,
// never inferred infinite.
struct HittingResult {
  Vec s;                          // hitting coordinates, kInfTime when not resolved
  std::vector<HitStatus> status;
  Mat matrix_at;                  // field matrix at s (finite coords; H-read otherwise)
  std::vector<long long> matrix_units;  // d*d row-major, lattice paths only
  long long iterations = 0;
  bool all_hit = false;

  bool hit(int i) const { return status[static_cast<size_t>(i)] == HitStatus::hit; }
};

// Monotone fixed-point iteration of the preliminary lemma:
//   v^(1) = r,  s^(n)_i = first passage of the diagonal to -v^(n)_i,
//   v^(n+1)_i = r_i + sum_{j != i} x^{i,j} read at s^(n)_j.
// Iterates are nondecreasing; stops at the fixed point or when a coordinate
// escapes the horizon. `sweep_cap` guards closed-form pathologies.
// `trace`, when given, receives s^(n) after every sweep.
HittingResult smallest_solution(const PathBundle& paths, const Vec& r, long long sweep_cap = 1000000,
                                std::vector<Vec>* trace = nullptr);

// Lemma part 3 as a property oracle: whenever u satisfies
// sum_j x^{i,j}(u_j) <= -r_i for all i, then u >= s. Always true on valid inputs.
bool check_dominance(const PathBundle& paths, const Vec& r, const Vec& u, const HittingResult& s);

// Lemma part 4: at each hit coordinate the diagonal sits at its running infimum,
// attained there for the first time.
bool check_infimum_property(const PathBundle& paths, const HittingResult& s);

}  // namespace spalf

#endif
