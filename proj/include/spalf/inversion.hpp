#ifndef SPALF_INVERSION_HPP
#define SPALF_INVERSION_HPP

#include <optional>

#include "spalf/model.hpp"

namespace spalf {

struct InversionResult {
  Vec value;      // candidate root of phi(x) = target
  Vec residual;   // phi(value) - target
  long long iterations = 0;
  bool converged = false;
};

enum class DriftKind { drifts_to_minus_infinity, oscillates, drifts_to_plus_infinity };

struct DriftClass {
  double rho = 0.0;       // Perron-Frobenius eigenvalue of the mean matrix
  DriftKind kind = DriftKind::oscillates;
  bool irreducible = false;
  Vec phi0;               // nonnegative root of phi = 0 (empty when (H) fails)
  bool hypothesis_holds = false;
  bool equivalence_checked = false;  // (phi0 = 0) <=> (rho <= 0), irreducible finite-mean case
  bool equivalence_ok = false;
};

struct HypothesisResult {
  bool holds = false;
  std::optional<Vec> witness;  // a point of D = { lambda >= 0 : phi_j(lambda) > 0 for all j }
  long long evaluations = 0;
};

// Budgeted search for a witness of hypothesis (H); a miss reports "not found",
// never a certificate of emptiness.
HypothesisResult check_hypothesis_H(const ExponentOracle& oracle);

// Damped Newton on phi(x) = target with the analytic Jacobian, initialized from a
// scaled-up witness of D (phi_j(c w) >= c phi_j(w) by convexity through 0, so the
// scaling terminates). Residual tolerance: tol_rel * (1 + |target_j|) + tol_abs.
InversionResult invert_exponent(const ExponentOracle& oracle, const Vec& target, double tol_rel = 1e-10,
                                double tol_abs = 0.0, const Vec* initial = nullptr);

// The nonnegative root of phi distinct from 0 when it exists, else 0: ladder of
// inversions at eps * 1 for eps in {1, 1e-1, ..., 1e-8}, extrapolated to eps = 0
// in the variable sqrt(eps) (the critical regime has a sqrt expansion), then
// polished by Newton when clearly nonzero.
Vec phi_at_zero(const ExponentOracle& oracle);

// Perron-Frobenius classification of the mean matrix: Collatz-Wielandt bracketing
// by power iteration on the shifted nonnegative matrix, blockwise over strongly
// connected components when reducible.
DriftClass classify_drift(const ExponentOracle& oracle);

// Bivariate exponent: the unique Phi >= 0 with phi_j(mu^(j) + Phi) = lambda_j,
// realized as the Esscher inverse at the shifted target; boundary components are
// handled by the {1e-6, 1e-7, 1e-8} perturbation ladder with extrapolation.
Vec big_phi(const ExponentOracle& oracle, const Vec& lambda, const Mat& mu);

// Closed forms for the two-dimensional Brownian-with-drift example: coupled
// square-root fixed point for the inverse, explicit D membership, Perron root,
// and the root of phi = 0.
struct Example2D {
  Vec phi_bar;   // inverse exponent at lambda
  bool in_D = false;
  double rho = 0.0;
  Vec phi0;
  long long iterations = 0;
};
Example2D example2d_closed_form(double a1, double a2, double a12, double a21, double q1, double q2,
                                const Vec& lambda);

// The example's forward model as a ModelSpec (diagonal Brownian motions with
// drift, pure-drift off-diagonal coordinates).
ModelSpec example2d_model(double a1, double a2, double a12, double a21, double q1, double q2);

}  // namespace spalf

#endif
