#ifndef SPALF_MODEL_HPP
#define SPALF_MODEL_HPP

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "spalf/linalg.hpp"

namespace spalf {

// One compound-Poisson component of a column process: events at `rate` per unit
// time, each adding `delta` to the column. On the lattice family `units` holds
// delta * k exactly (delta itself is then units / k rounded to double).
struct JumpComponent {
  double rate = 0.0;
  Vec delta;
  std::vector<long long> units;  // empty for the continuous family
};

// Full parametrization of a spectrally positive additive Levy field.
// Column j of `drift` is the drift vector of the column process X^(j); `diffusion[j]`
// is the Brownian variance coefficient of the diagonal coordinate X^{j,j}.
//
// Continuous family: every jump vector is componentwise nonnegative; downward motion
// on the diagonal happens through drift/diffusion only.
// Lattice family (k > 0): no diffusion, all drift converted at construction into
// rate-k|a| streams of (sign a)/k steps, jump vectors on the k^-1 grid with diagonal
// coordinate >= -1/k and nonnegative off-diagonal coordinates.
struct ModelSpec {
  int d = 0;
  Mat drift;                                    // zero matrix for the lattice family
  Vec diffusion;                                // q_j, zero for the lattice family
  std::vector<std::vector<JumpComponent>> jumps;  // per column
  int lattice_k = 0;                            // 0 = continuous family

  bool is_lattice() const { return lattice_k > 0; }

  static ModelSpec continuous(Mat drift, Vec diffusion, std::vector<std::vector<JumpComponent>> jumps);
  static ModelSpec lattice(int k, const Mat& drift, std::vector<std::vector<JumpComponent>> jumps);

  // Exact grid representation of a level vector r (lattice family only).
  std::vector<long long> grid_units(const Vec& r) const;
};

double special_product_vec(const Mat& A, const Mat& B);

// Evaluator for the Laplace exponent phi = (phi_1,...,phi_d) of a spaLf,
//   E[exp(-<lambda, X^(j)_t>)] = exp(t phi_j(lambda)),
// its Jacobian convention J(lambda)_{i,j} = -d phi_j / d lambda_i, and Esscher shifts.
// Instances are immutable; all evaluation is pure.
class ExponentOracle {
 public:
  using ClosedForm = std::function<Vec(const Vec&)>;

  explicit ExponentOracle(ModelSpec model);
  // Escape hatch for non-finite jump measures: closed-form exponent (and optionally
  // its Jacobian); simulation support is disabled for such oracles.
  ExponentOracle(int dim, ClosedForm phi, std::function<Mat(const Vec&)> jacobian = nullptr);

  int dim() const { return d_; }
  bool has_model() const { return model_ != nullptr; }
  const ModelSpec& model() const;

  Vec eval(const Vec& lambda) const;
  double eval_col(int j, const Vec& lambda) const;
  Mat jacobian(const Vec& lambda) const;
  Mat mean_matrix() const { return jacobian(Vec(d_, 0.0)); }

  // Exponent of the Esscher transform: phi^mu_j(lambda) = phi_j(lambda + mu^(j)) - phi_j(mu^(j)).
  ExponentOracle esscher(const Mat& mu) const;
  // Tilted model realizing the same exponent for simulation: jump rates become
  // rate * exp(-<mu^(j), delta>) and the diagonal drift shifts by -q_j mu_{j,j}.
  ModelSpec esscher_model(const Mat& mu) const;

  const Mat& shift() const { return shift_; }

 private:
  int d_;
  std::shared_ptr<const ModelSpec> model_;
  ClosedForm closed_form_;
  std::function<Mat(const Vec&)> closed_jacobian_;
  Mat shift_;          // Esscher shift columns mu^(j); zero for a base oracle
  Vec shift_offset_;   // phi_j(mu^(j)) cached

  Vec eval_base(const Vec& lambda) const;
  Mat jacobian_base(const Vec& lambda) const;
};

}  // namespace spalf

#endif
