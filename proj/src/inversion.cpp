#include "spalf/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "spalf/errors.hpp"
#include "spalf/numerics.hpp"

namespace spalf {

namespace {

// min_j phi_j, with non-finite evaluations treated as unusable.
double min_phi(const ExponentOracle& oracle, const Vec& lambda, long long& evals) {
  ++evals;
  Vec phi = oracle.eval(lambda);
  double m = phi[0];
  for (double v : phi) {
    if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    m = std::min(m, v);
  }
  return m;
}

// Witnesses near the lower edge of D keep later Newton iterates well scaled
// (lattice exponents grow like e^{lambda} and overflow far inside D).
Vec shrink_witness(const ExponentOracle& oracle, Vec w, long long& evals) {
  for (int pass = 0; pass < 40; ++pass) {
    if (max_abs(w) < 1e-3) break;
    Vec half = w;
    for (double& v : half) v *= 0.5;
    if (min_phi(oracle, half, evals) <= 0.0) break;
    w = half;
  }
  return w;
}

}  // namespace

HypothesisResult check_hypothesis_H(const ExponentOracle& oracle) {
  const int d = oracle.dim();
  HypothesisResult out;
  const double scales[] = {1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  const double probes[] = {1e-3, 1e-2, 1e-1, 0.3, 1.0, 3.0, 1e1, 3e1, 1e2, 3e2, 1e3};
  for (double s : scales) {
    Vec lambda(d, s);
    double best = min_phi(oracle, lambda, out.evaluations);
    if (best > 0.0) {
      out.holds = true;
      out.witness = shrink_witness(oracle, lambda, out.evaluations);
      return out;
    }
    // coordinate ascent on min_j phi_j over a log-scale probe grid
    for (int round = 0; round < 40; ++round) {
      bool improved = false;
      for (int i = 0; i < d; ++i) {
        double best_coord = lambda[i];
        for (double p : probes) {
          lambda[i] = p;
          double v = min_phi(oracle, lambda, out.evaluations);
          if (v > best) {
            best = v;
            best_coord = p;
            improved = true;
          }
          if (v > 0.0) {
            out.holds = true;
            out.witness = shrink_witness(oracle, lambda, out.evaluations);
            return out;
          }
        }
        lambda[i] = best_coord;
      }
      if (!improved) break;
    }
  }
  return out;
}

InversionResult invert_exponent(const ExponentOracle& oracle, const Vec& target, double tol_rel, double tol_abs,
                                const Vec* initial) {
  const int d = oracle.dim();
  if (static_cast<int>(target.size()) != d) throw std::invalid_argument("invert_exponent: target length mismatch");

  Vec x;
  if (initial) {
    x = *initial;
  } else {
    for (double t : target)
      if (!(t > 0.0)) throw std::invalid_argument("invert_exponent: target must be componentwise positive");
    HypothesisResult hyp = check_hypothesis_H(oracle);
    if (!hyp.holds) throw std::invalid_argument("invert_exponent: no witness of hypothesis (H) found");
    x = *hyp.witness;
    // phi_j(c w) >= c phi_j(w) for c >= 1, so doubling reaches any target.
    for (int tries = 0; tries < 200; ++tries) {
      Vec phi = oracle.eval(x);
      bool finite = true, above = true;
      for (int j = 0; j < d; ++j) {
        if (!std::isfinite(phi[j])) finite = false;
        else if (phi[j] < target[j]) above = false;
      }
      if (!finite) {
        // overshot into exponential overflow; back off toward the witness
        for (double& v : x) v *= 0.75;
        continue;
      }
      if (above) break;
      for (double& v : x) v *= 2.0;
      if (tries == 199) throw numeric_error("invert_exponent: could not bracket the target from above");
    }
  }

  auto tolerance = [&](int j) { return tol_rel * (1.0 + std::fabs(target[j])) + tol_abs; };
  InversionResult res;
  res.value = x;
  Vec F = oracle.eval(x);
  for (int j = 0; j < d; ++j) F[j] -= target[j];
  double fnorm = max_abs(F);
  for (res.iterations = 0; res.iterations < 500; ++res.iterations) {
    bool ok = true;
    for (int j = 0; j < d; ++j)
      if (std::fabs(F[j]) > tolerance(j)) ok = false;
    if (ok) {
      res.converged = true;
      break;
    }
    // dF_{j,i} = d phi_j / d x_i = -J(x)_{i,j}; Newton step solves J^T delta = F.
    Mat Jt = oracle.jacobian(res.value).transpose();
    Vec delta;
    try {
      delta = solve_linear(Jt, F);
    } catch (const std::exception&) {
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-14) {
      Vec trial = res.value;
      for (int j = 0; j < d; ++j) trial[j] = std::max(0.0, trial[j] + alpha * delta[j]);
      Vec Ft = oracle.eval(trial);
      for (int j = 0; j < d; ++j) Ft[j] -= target[j];
      if (max_abs(Ft) < fnorm) {
        res.value = trial;
        F = Ft;
        fnorm = max_abs(Ft);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  res.residual = F;
  return res;
}

Vec phi_at_zero(const ExponentOracle& oracle) {
  const int d = oracle.dim();
  HypothesisResult hyp = check_hypothesis_H(oracle);
  if (!hyp.holds) throw std::invalid_argument("phi_at_zero: hypothesis (H) witness not found");

  const int kLadder = 9;  // eps = 10^0 .. 10^-8
  std::vector<Vec> values;
  values.reserve(kLadder);
  for (int k = 0; k < kLadder; ++k) {
    double eps = std::pow(10.0, -k);
    InversionResult inv = invert_exponent(oracle, Vec(d, eps), 1e-12, 1e-13);
    if (!inv.converged) throw numeric_error("phi_at_zero: ladder inversion failed at eps=" + std::to_string(eps));
    values.push_back(inv.value);
  }
  // Extrapolate the last 5 ladder points in h = sqrt(eps).
  const int use = 5;
  std::vector<double> h(use);
  for (int m = 0; m < use; ++m) h[m] = std::pow(10.0, -0.5 * (kLadder - use + m));
  Vec result(d);
  double gap = 0.0;
  for (int i = 0; i < d; ++i) {
    std::vector<double> v(use);
    for (int m = 0; m < use; ++m) v[m] = values[kLadder - use + m][i];
    auto [val, g] = neville_with_gap(h, v);
    result[i] = val;
    gap = std::max(gap, g);
  }
  if (gap > 1e-6) throw numeric_error("phi_at_zero: extrapolation disagreement " + std::to_string(gap));
  if (max_abs(result) <= 1e-6) return Vec(d, 0.0);
  InversionResult polish = invert_exponent(oracle, Vec(d, 0.0), 0.0, 1e-12, &result);
  if (!polish.converged) throw numeric_error("phi_at_zero: Newton polish failed");
  for (double& v : polish.value) v = std::max(0.0, v);
  return polish.value;
}

namespace {

// Tarjan strongly connected components on the nonzero off-diagonal pattern.
struct Tarjan {
  const Mat& J;
  int n;
  std::vector<int> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<int> stack;
  int counter = 0, ncomp = 0;

  explicit Tarjan(const Mat& m) : J(m), n(m.rows), index(n, -1), low(n, 0), comp(n, -1), on_stack(n, false) {}

  void run() {
    for (int v = 0; v < n; ++v)
      if (index[v] < 0) dfs(v);
  }
  void dfs(int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w = 0; w < n; ++w) {
      if (w == v || J(v, w) == 0.0) continue;
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
        if (w == v) break;
      }
      ++ncomp;
    }
  }
};

// Collatz-Wielandt bracketing of the Perron root of an irreducible Metzler block.
double perron_root_block(const Mat& J, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  if (n == 1) return J(idx[0], idx[0]);
  double c = 1.0;
  for (int i = 0; i < n; ++i) c = std::max(c, 1.0 + std::fabs(J(idx[i], idx[i])));
  Vec x(n, 1.0), y(n);
  for (long long iter = 0; iter < 100000; ++iter) {
    for (int i = 0; i < n; ++i) {
      double s = c * x[i] + J(idx[i], idx[i]) * x[i];
      for (int j = 0; j < n; ++j)
        if (j != i) s += J(idx[i], idx[j]) * x[j];
      y[i] = s;
    }
    double lo = y[0] / x[0], hi = lo;
    for (int i = 1; i < n; ++i) {
      double ratio = y[i] / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi - lo <= 1e-10 * std::max(1.0, std::fabs(hi))) return 0.5 * (lo + hi) - c;
    double norm = 0.0;
    for (double v : y) norm = std::max(norm, v);
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  throw numeric_error("classify_drift: Collatz-Wielandt bracket failed to contract");
}

}  // namespace

DriftClass classify_drift(const ExponentOracle& oracle) {
  const int d = oracle.dim();
  Mat J = oracle.mean_matrix();
  for (double v : J.a)
    if (!std::isfinite(v)) throw std::invalid_argument("classify_drift: mean matrix must be finite");

  Tarjan scc(J);
  scc.run();
  DriftClass out;
  out.irreducible = (scc.ncomp == 1);
  double rho = -std::numeric_limits<double>::infinity();
  for (int comp = 0; comp < scc.ncomp; ++comp) {
    std::vector<int> idx;
    for (int i = 0; i < d; ++i)
      if (scc.comp[i] == comp) idx.push_back(i);
    rho = std::max(rho, perron_root_block(J, idx));
  }
  out.rho = rho;
  const double band = 1e-9;
  out.kind = rho > band ? DriftKind::drifts_to_plus_infinity
                        : (rho < -band ? DriftKind::drifts_to_minus_infinity : DriftKind::oscillates);

  HypothesisResult hyp = check_hypothesis_H(oracle);
  out.hypothesis_holds = hyp.holds;
  if (hyp.holds) {
    out.phi0 = phi_at_zero(oracle);
    if (out.irreducible) {
      out.equivalence_checked = true;
      bool zero_root = max_abs(out.phi0) <= 1e-6;
      out.equivalence_ok = (zero_root == (rho <= band));
    }
  }
  return out;
}

Vec big_phi(const ExponentOracle& oracle, const Vec& lambda, const Mat& mu) {
  const int d = oracle.dim();
  if (static_cast<int>(lambda.size()) != d || mu.rows != d || mu.cols != d)
    throw std::invalid_argument("big_phi: dimension mismatch");
  for (double v : mu.a)
    if (v < 0.0) throw std::invalid_argument("big_phi: mu must be entrywise nonnegative");
  Vec phibar(d);
  for (int j = 0; j < d; ++j) phibar[j] = oracle.eval_col(j, mu.column(j));
  Vec target(d);
  bool boundary = false;
  for (int j = 0; j < d; ++j) {
    target[j] = lambda[j] - phibar[j];
    if (target[j] < -1e-9 * (1.0 + std::fabs(lambda[j])))
      throw std::invalid_argument("big_phi: (lambda, mu) outside M_phi (lambda_j < phi_j(mu^(j)))");
    if (target[j] < 1e-6) boundary = true;
  }
  ExponentOracle tilted = oracle.esscher(mu);
  if (!boundary) {
    InversionResult inv = invert_exponent(tilted, target);
    if (!inv.converged) throw numeric_error("big_phi: inversion failed");
    // Postcondition of the functional equation.
    for (int j = 0; j < d; ++j) {
      Vec arg = mu.column(j);
      for (int i = 0; i < d; ++i) arg[i] += inv.value[i];
      if (std::fabs(oracle.eval_col(j, arg) - lambda[j]) > 1e-8 * (1.0 + std::fabs(lambda[j])))
        throw numeric_error("big_phi: functional-equation residual too large");
    }
    return inv.value;
  }
  // Boundary ladder {1e-6, 1e-7, 1e-8}, extrapolated in sqrt(eps).
  const double eps_ladder[] = {1e-6, 1e-7, 1e-8};
  std::vector<Vec> vals;
  for (double eps : eps_ladder) {
    Vec t2 = target;
    for (double& v : t2) v = std::max(v, eps);
    InversionResult inv = invert_exponent(tilted, t2, 1e-12, 1e-13);
    if (!inv.converged) throw numeric_error("big_phi: boundary ladder inversion failed");
    vals.push_back(inv.value);
  }
  std::vector<double> h = {std::sqrt(1e-6), std::sqrt(1e-7), std::sqrt(1e-8)};
  Vec out(d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> v = {vals[0][i], vals[1][i], vals[2][i]};
    out[i] = std::max(0.0, neville_at_zero(h, v));
  }
  return out;
}

Example2D example2d_closed_form(double a1, double a2, double a12, double a21, double q1, double q2,
                                const Vec& lambda) {
  if (!(q1 > 0.0) || !(q2 > 0.0)) throw std::invalid_argument("example2d: q must be positive");
  if (a12 < 0.0 || a21 < 0.0) throw std::invalid_argument("example2d: off-diagonal drift must be >= 0");
  if (lambda.size() != 2) throw std::invalid_argument("example2d: lambda must have length 2");
  Example2D out;

  auto g1 = [&](double x2, double l1) { return (a1 + std::sqrt(a1 * a1 + 2.0 * q1 * l1 + 2.0 * a21 * q1 * x2)) / q1; };
  auto g2 = [&](double x1, double l2) { return (a2 + std::sqrt(a2 * a2 + 2.0 * q2 * l2 + 2.0 * a12 * q2 * x1)) / q2; };

  // Inverse exponent: monotone fixed point from (0, 0).
  double x1 = 0.0, x2 = 0.0;
  long long iter = 0;
  for (; iter < 10000; ++iter) {
    double n1 = g1(x2, lambda[0]);
    double n2 = g2(n1, lambda[1]);
    double change = std::max(std::fabs(n1 - x1), std::fabs(n2 - x2));
    x1 = n1;
    x2 = n2;
    if (change <= 1e-13 * (1.0 + std::fabs(x1) + std::fabs(x2))) break;
  }
  if (iter >= 10000) throw numeric_error("example2d: fixed point did not converge");
  out.phi_bar = {x1, x2};
  out.iterations = iter;

  double root1 = std::max((a1 + std::sqrt(a1 * a1 + 2.0 * a21 * q1 * lambda[1])) / q1, 0.0);
  double root2 = std::max((a2 + std::sqrt(a2 * a2 + 2.0 * a12 * q2 * lambda[0])) / q2, 0.0);
  out.in_D = lambda[0] > root1 && lambda[1] > root2;

  double disc = (a1 - a2) * (a1 - a2) + 4.0 * a12 * a21;
  out.rho = 0.5 * (a1 + a2 + std::sqrt(disc));

  if (a1 < 0.0 && a2 < 0.0 && a1 * a2 >= a12 * a21) {
    out.phi0 = {0.0, 0.0};
  } else {
    // Largest fixed point of the lambda = 0 map, reached monotonically from above.
    double y1 = std::max({4.0 * (1.0 + std::fabs(a1)) / q1, 4.0 * std::fabs(a1) / q1, 1.0});
    double y2 = std::max({4.0 * (1.0 + std::fabs(a2)) / q2, 4.0 * std::fabs(a2) / q2, 1.0});
    for (int tries = 0; tries < 200; ++tries) {
      if (g1(y2, 0.0) <= y1 && g2(y1, 0.0) <= y2) break;
      y1 *= 2.0;
      y2 *= 2.0;
      if (tries == 199) throw numeric_error("example2d: could not bracket phi(0) from above");
    }
    long long it0 = 0;
    for (; it0 < 10000; ++it0) {
      double n1 = g1(y2, 0.0);
      double n2 = g2(n1, 0.0);
      double change = std::max(std::fabs(n1 - y1), std::fabs(n2 - y2));
      y1 = n1;
      y2 = n2;
      if (change <= 1e-13 * (1.0 + std::fabs(y1) + std::fabs(y2))) break;
    }
    if (it0 >= 10000) throw numeric_error("example2d: phi(0) fixed point did not converge");
    if (std::max(std::fabs(y1), std::fabs(y2)) <= 1e-9) y1 = y2 = 0.0;
    out.phi0 = {y1, y2};
  }
  return out;
}

ModelSpec example2d_model(double a1, double a2, double a12, double a21, double q1, double q2) {
  Mat drift = {{a1, a12}, {a21, a2}};
  return ModelSpec::continuous(drift, {q1, q2}, {{}, {}});
}

}  // namespace spalf
