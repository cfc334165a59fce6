#ifndef SPALF_PATH_HPP
#define SPALF_PATH_HPP

#include <limits>
#include <vector>

#include "spalf/linalg.hpp"

namespace spalf {

constexpr double kInfTime = std::numeric_limits<double>::infinity();

// One column of a realized matrix field: x^{i,j}(t) = b_i t + sum of event deltas
// up to t. Prefix sums are laid out flat: cum[i * (m+1) + s] is the sum of the
// first s deltas of coordinate i, over m events.
struct PathColumn {
  Vec drift;                       // b^{(j)}, length d; zero for lattice paths
  std::vector<double> times;       // strictly increasing event epochs in (0, H]
  std::vector<double> cum;         // d x (m+1) prefix sums of deltas
  std::vector<long long> cum_units;  // same layout, lattice family only

  int events() const { return static_cast<int>(times.size()); }
};

// A realized trajectory of the matrix field on [0, H], supporting exact left limits.
// Lattice paths (k > 0) carry exact integer grid units; values then live on (1/k)Z.
struct PathBundle {
  int d = 0;
  double horizon = 0.0;
  int k = 0;  // 0 = continuous family
  std::vector<PathColumn> cols;

  bool is_lattice() const { return k > 0; }

  // Builders validate the family constraints (off-diagonal monotone, diagonal
  // skip-free) and build prefix sums. Events arrive as (time, delta d-vector).
  static PathBundle continuous(int d, double horizon, const std::vector<Vec>& drifts,
                               const std::vector<std::vector<std::pair<double, Vec>>>& events);
  static PathBundle lattice(int d, double horizon, int k,
                            const std::vector<std::vector<std::pair<double, std::vector<long long>>>>& events);

  // Number of events of column j with epoch <= t (or < t).
  int count_le(int j, double t) const;
  int count_lt(int j, double t) const;

  // Right-continuous value x^{i,j}(t) and left limit x^{i,j}(t-).
  double value(int i, int j, double t) const;
  double left(int i, int j, double t) const;
  long long unit_value(int i, int j, double t) const;   // lattice, inclusive of epoch t
  long long unit_left(int i, int j, double t) const;

  double cum_at(int i, int j, int event_count) const {
    const PathColumn& c = cols[j];
    return c.cum[static_cast<size_t>(i) * (c.events() + 1) + event_count];
  }
  long long cum_units_at(int i, int j, int event_count) const {
    const PathColumn& c = cols[j];
    return c.cum_units[static_cast<size_t>(i) * (c.events() + 1) + event_count];
  }
};

}  // namespace spalf

#endif
