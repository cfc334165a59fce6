#ifndef SPALF_SAMPLING_HPP
#define SPALF_SAMPLING_HPP

#include <random>
#include <vector>

#include "spalf/model.hpp"
#include "spalf/path.hpp"

namespace spalf {

// Exact simulation of a lattice-family model: per column one merged Poisson clock
// at the total component rate, each event drawing a component proportionally to
// its rate. Epochs are generated in order through exponential gaps.
class ModelSampler {
 public:
  explicit ModelSampler(const ModelSpec& model);

  int dim() const { return d_; }
  int k() const { return k_; }
  double column_rate(int j) const { return cols_[j].total_rate; }

  // Realized trajectory on [0, H]; `out` is reused to avoid reallocation.
  void sample_path(std::mt19937_64& rng, double horizon, PathBundle& out) const;

  // Extends a previously sampled bundle from its current horizon to `horizon`
  // using `rng`; the existing prefix is left untouched.
  void extend_path(std::mt19937_64& rng, double horizon, PathBundle& bundle) const;

  // Free field at a fixed multivariate time: column j of the matrix, in grid
  // units, written to units_out[i * d + j].
  void sample_matrix_at(std::mt19937_64& rng, const Vec& t, std::vector<long long>& units_out) const;

 private:
  struct Column {
    double total_rate = 0.0;
    std::vector<double> cum_prob;        // component selection thresholds
    std::vector<long long> units;        // ncomp x d, flattened
  };
  int d_;
  int k_;
  std::vector<Column> cols_;

  int pick_component(const Column& c, double u) const;
};

}  // namespace spalf

#endif
