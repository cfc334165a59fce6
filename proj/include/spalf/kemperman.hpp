#ifndef SPALF_KEMPERMAN_HPP
#define SPALF_KEMPERMAN_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "spalf/estimate.hpp"
#include "spalf/model.hpp"

namespace spalf {

// d = 1 analytic identity: the first-passage density of Brownian motion with
// drift a and variance q through level -r is both (r/t) p_t(-r) (Kemperman) and
// the inverse-Gaussian closed form.
struct KempermanD1Row {
  double t = 0.0;
  double kemperman = 0.0;        // (r/t) * Normal(a t, q t) density at -r
  double inverse_gaussian = 0.0; // sqrt(r^2/(2 pi q t^3)) exp(-(r+at)^2/(2qt))
};
std::vector<KempermanD1Row> kemperman_d1_analytic(double a, double q, double r, const Vec& t_grid);

// Total first-passage mass by adaptive quadrature: 1 for a < 0, exp(-2ar/q) for a > 0.
double first_passage_mass(double a, double q, double r, double tol = 1e-9);

// Three-way Monte Carlo verification of the image-measure theorem on a lattice
// model. The exact finite-k contract is the pre-limit product form
//   Prod_j [k (1 - e^{-(alpha_j + Phi_j)/k})]^{-1};
// the continuous-limit form Prod_j (alpha_j + Phi_j)^{-1} is also reported with
// the exactly computed discretization gap as its extra allowance.
// Declared t sampler for the rhs arm: a truncated product exponential (default),
// or a truncated product Gamma(1/2, lambda_j) whose 1/sqrt(t) singularity tames
// the det/(t_1...t_d) small-t variance when the exponential's effective sample
// size collapses.
struct TSampler {
  enum class Kind { exponential, sqrt_gamma } kind = Kind::exponential;
  double rate = 1.0;  // exponential kind only
};

struct KempermanCheck {
  MCEstimate lhs;               // r-integrated functional, grid-geometric r sampling
  MCEstimate rhs;               // det(-X_t)/(t_1...t_d) importance-sampled integral
  double product_discrete = 0.0;
  double product_limit = 0.0;   // continuous-limit closed form
  double discretization_gap = 0.0;
  double bias_bound = 0.0;      // censoring / t-truncation allowance (per arm)
  double ess_rhs = 0.0;
  long long negative_determinants = 0;
  Vec big_phi_value;
  bool pass = false;            // three-way agreement against the discrete form
  bool pass_limit_form = false; // lhs vs the continuous-limit form
};
KempermanCheck verify_kemperman_theorem(const ModelSpec& model, const Vec& alpha, const Vec& lambda,
                                        const Mat& mu, double horizon, long long n, std::uint64_t seed,
                                        TSampler t_sampler = {}, int workers = 1);

// d = 1 Levy measure of the first-passage subordinator: density p_t(0)/t, and the
// quadrature check  int (1 - e^{-lambda t}) nu(dt) = (a + sqrt(a^2 + 2 q lambda))/q - (a + |a|)/q.
struct LevyMeasureReport {
  std::vector<std::pair<double, double>> density;                  // (t, nu density)
  std::vector<std::tuple<double, double, double>> exponent_check;  // (lambda, quadrature, closed form)
  double max_error = 0.0;
};
LevyMeasureReport levy_measure_d1(double a, double q, const Vec& t_grid, const Vec& lambda_grid);

// First-passage density formula for deterministic off-diagonal coordinates
// (pure drift): the off-diagonal law is a point mass, the integral collapses to
// det(diag(r) - xbar) / (t_1...t_d) times the product of diagonal densities.
struct PointMassOffdiag {
  Mat offdiag_slopes;  // x^{i,j}(t) = slope(i,j) * t for i != j; diagonal ignored
  // density of the diagonal process X^{i,i} at time t evaluated at y
  std::function<double(int i, double y, double t)> diag_density;
};
double first_passage_density_point_mass(const PointMassOffdiag& spec, const Vec& r, const Vec& t);

// General quadrature form for d <= 2: p_t is the density of the hatted matrix
// (diagonal entries = row sums of the field, off-diagonals as-is); integration
// over the off-diagonal coordinates on [0, box]^{d(d-1)}.
double first_passage_density_quadrature(int d, const std::function<double(const Mat&)>& p_t, const Vec& r,
                                        const Vec& t, double box, double tol = 1e-8, long long budget = 40000000);

}  // namespace spalf

#endif
