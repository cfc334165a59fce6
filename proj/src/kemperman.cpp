#include "spalf/kemperman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spalf/errors.hpp"
#include "spalf/inversion.hpp"
#include "spalf/numerics.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"
#include "spalf/solver.hpp"

namespace spalf {

namespace {

double inverse_gaussian_density(double a, double q, double r, double t) {
  return std::sqrt(r * r / (2.0 * M_PI * q * t * t * t)) * std::exp(-(r + a * t) * (r + a * t) / (2.0 * q * t));
}

long long det_neg_units(const std::vector<long long>& units, int d) {
  if (d == 1) return -units[0];
  if (d == 2) {
    __int128 v = static_cast<__int128>(units[0]) * units[3] - static_cast<__int128>(units[1]) * units[2];
    return static_cast<long long>(v);  // det(-x) = det(x) for d = 2
  }
  if (d == 3) {
    auto m = [&](int i, int j) { return static_cast<__int128>(units[static_cast<size_t>(i) * 3 + j]); };
    __int128 v = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                 m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    return static_cast<long long>(-v);
  }
  throw std::invalid_argument("verify_kemperman_theorem: d > 3 out of scope");
}

}  // namespace

std::vector<KempermanD1Row> kemperman_d1_analytic(double a, double q, double r, const Vec& t_grid) {
  if (!(q > 0.0)) throw std::invalid_argument("kemperman_d1_analytic: q must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("kemperman_d1_analytic: r must be positive");
  std::vector<KempermanD1Row> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("kemperman_d1_analytic: t grid must be positive");
    KempermanD1Row row;
    row.t = t;
    row.kemperman = (r / t) * normal_pdf(-r, a * t, q * t);
    row.inverse_gaussian = inverse_gaussian_density(a, q, r, t);
    rows.push_back(row);
  }
  return rows;
}

double first_passage_mass(double a, double q, double r, double tol) {
  if (!(q > 0.0) || !(r > 0.0) || a == 0.0)
    throw std::invalid_argument("first_passage_mass: needs q > 0, r > 0, a != 0");
  // (r + at)^2/(2qt) >= a^2 t/(2q) + ra/q, so the density tail is exponentially
  // dominated; extend T until the envelope tail drops below tol/10.
  double T = std::max(1.0, 8.0 * r / std::fabs(a));
  auto tail_bound = [&](double T0) {
    return r / std::sqrt(2.0 * M_PI * q * T0 * T0 * T0) * std::exp(-r * a / q) * (2.0 * q / (a * a)) *
           std::exp(-a * a * T0 / (2.0 * q));
  };
  while (tail_bound(T) > 0.1 * tol && T < 1e9) T *= 2.0;
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : inverse_gaussian_density(a, q, r, t); };
  return adaptive_simpson(f, 1e-12, T, 0.1 * tol) ;
}

KempermanCheck verify_kemperman_theorem(const ModelSpec& model, const Vec& alpha, const Vec& lambda,
                                        const Mat& mu, double horizon, long long n, std::uint64_t seed,
                                        TSampler t_sampler, int workers) {
  if (!model.is_lattice()) throw std::invalid_argument("verify_kemperman_theorem: lattice model required");
  const int d = model.d;
  const int k = model.lattice_k;
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("verify_kemperman_theorem: alpha must be positive for MC sampling");
  ExponentOracle oracle{model};
  for (int j = 0; j < d; ++j)
    if (lambda[j] < oracle.eval_col(j, mu.column(j)) - 1e-12)
      throw std::invalid_argument("verify_kemperman_theorem: (lambda, mu) outside M_phi");

  KempermanCheck out;
  out.big_phi_value = big_phi(oracle, lambda, mu);
  // Exact finite-k value of both arms restricted to strictly positive grid levels
  // (the image-measure density covers exactly the r >= (1/k) 1 terms):
  //   Prod_j e^{-(alpha_j+Phi_j)/k} / [k (1 - e^{-(alpha_j+Phi_j)/k})].
  auto discrete_product = [&](const Vec& phi_vec) {
    double p = 1.0;
    for (int j = 0; j < d; ++j) {
      double x = (alpha[j] + phi_vec[j]) / k;
      p *= std::exp(-x) / (k * (1.0 - std::exp(-x)));
    }
    return p;
  };
  out.product_discrete = discrete_product(out.big_phi_value);
  {
    double p = 1.0;
    for (int j = 0; j < d; ++j) p *= alpha[j] + out.big_phi_value[j];
    out.product_limit = 1.0 / p;
  }
  out.discretization_gap = std::fabs(out.product_discrete - out.product_limit);

  // Censoring / truncation allowance shared by both arms (exponential shift).
  out.bias_bound = 0.0;
  for (int j = 0; j < d; ++j) {
    double eps = 0.5 * (lambda[j] - oracle.eval_col(j, mu.column(j)));
    if (!(eps > 0.0)) {
      out.bias_bound += 1.0;
      continue;
    }
    Vec shifted = lambda;
    shifted[j] -= eps;
    out.bias_bound += std::exp(-eps * horizon) * discrete_product(big_phi(oracle, shifted, mu));
  }

  ModelSampler sampler(model);
  // lhs: r_j = (1 + floor(k E_j))/k with E_j exponential(alpha_j): the strictly
  // positive grid-geometric law, giving a constant importance weight.
  double lhs_weight = 1.0;
  for (int j = 0; j < d; ++j) lhs_weight *= std::exp(-alpha[j] / k) / (k * (1.0 - std::exp(-alpha[j] / k)));
  Accumulator lhs_acc = parallel_reduce<Accumulator>(
      n, workers, Accumulator{},
      [&](Accumulator& acc, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx), 1);
        std::exponential_distribution<double> ed(1.0);
        Vec r(d);
        for (int j = 0; j < d; ++j) r[j] = (1.0 + std::floor(ed(rng) / alpha[j] * k)) / k;
        thread_local PathBundle ws;
        sampler.sample_path(rng, horizon, ws);
        HittingResult hit = smallest_solution(ws, r);
        if (!hit.all_hit) {
          acc.add_censored();
          return;
        }
        double e = 0.0;
        for (int j = 0; j < d; ++j) e += lambda[j] * hit.s[j];
        e += special_product(mu, hit.matrix_at);
        acc.add(std::exp(-e));
      },
      [](const Accumulator& a, const Accumulator& b) { return a.merged(b); });
  out.lhs = MCEstimate::from(lhs_acc, seed, lhs_weight);

  // rhs: t from the declared sampler, field matrix simulated at t.
  const double rate = t_sampler.rate;
  const double trunc = 1.0 - std::exp(-rate * horizon);
  const bool sqrt_gamma = t_sampler.kind == TSampler::Kind::sqrt_gamma;
  if (sqrt_gamma)
    for (double l : lambda)
      if (!(l > 0.0)) throw std::invalid_argument("verify_kemperman_theorem: sqrt-gamma sampler needs lambda > 0");
  struct RhsTally {
    Accumulator acc;
    double vsum = 0.0;  // sum of |contribution|, for the concentration diagnostic
    long long negdet = 0;
    RhsTally merged(const RhsTally& o) const {
      return {acc.merged(o.acc), vsum + o.vsum, negdet + o.negdet};
    }
  };
  const double kd = std::pow(static_cast<double>(k), d);
  RhsTally rhs_tally = parallel_reduce<RhsTally>(
      n, workers, RhsTally{},
      [&](RhsTally& tally, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx), 2);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        Vec t(d);
        double g = 1.0;
        bool in_box = true;
        for (int j = 0; j < d; ++j) {
          if (sqrt_gamma) {
            double b = lambda[j], tt = 0.0;
            int tries = 0;
            do {
              double z = normal(rng);
              tt = z * z / (2.0 * b);
            } while (tt > horizon && ++tries < 200);
            if (tt > horizon) { in_box = false; break; }
            t[j] = tt;
            g *= std::sqrt(b / (M_PI * tt)) * std::exp(-b * tt) / std::erf(std::sqrt(b * horizon));
          } else {
            t[j] = -std::log1p(-unif(rng) * trunc) / rate;
            g *= rate * std::exp(-rate * t[j]) / trunc;
          }
        }
        if (!in_box) { tally.acc.add(0.0); return; }
        double w = 1.0 / g;
        thread_local std::vector<long long> units;
        sampler.sample_matrix_at(rng, t, units);
        bool in_Mhat = true;
        for (int i = 0; i < d && in_Mhat; ++i) {
          long long row = 0;
          for (int j = 0; j < d; ++j) row += units[static_cast<size_t>(i) * d + j];
          if (row > -1) in_Mhat = false;  // strictly negative row sums only
        }
        if (!in_Mhat) {
          tally.acc.add(0.0);
          return;
        }
        long long det_units = det_neg_units(units, d);
        if (det_units < 0) {
          ++tally.negdet;
          tally.acc.add(0.0);
          return;
        }
        double det = static_cast<double>(det_units) / kd;
        double e = 0.0;
        double tprod = 1.0;
        for (int j = 0; j < d; ++j) {
          long long row = 0;
          for (int i2 = 0; i2 < d; ++i2) row += units[static_cast<size_t>(j) * d + i2];
          e -= alpha[j] * (static_cast<double>(row) / k);  // e^{<alpha, x 1>}, x 1 <= 0
          e += lambda[j] * t[j];
          tprod *= t[j];
        }
        for (int j = 0; j < d; ++j)
          for (int i2 = 0; i2 < d; ++i2)
            e += mu(i2, j) * (static_cast<double>(units[static_cast<size_t>(i2) * d + j]) / k);
        double value = std::exp(-e) * det / tprod * w;
        tally.acc.add(value);
        tally.vsum += std::fabs(value);
      },
      [](const RhsTally& a, const RhsTally& b) { return a.merged(b); });
  out.rhs = MCEstimate::from(rhs_tally.acc, seed);
  out.negative_determinants = rhs_tally.negdet;
  // contribution-concentration ESS: (sum |v|)^2 / sum v^2
  out.ess_rhs = rhs_tally.vsum * rhs_tally.vsum / std::max(1e-300, rhs_tally.acc.sumsq);
  if (out.ess_rhs < static_cast<double>(n) / 100.0)
    throw resource_error("verify_kemperman_theorem: effective sample size below n/100; choose another t sampler");

  double sl = out.lhs.stderr_, sr = out.rhs.stderr_;
  double comb = std::sqrt(sl * sl + sr * sr);
  bool lhs_ok = std::fabs(out.lhs.mean - out.product_discrete) <= 4.0 * sl + out.bias_bound;
  bool rhs_ok = std::fabs(out.rhs.mean - out.product_discrete) <= 4.0 * sr + out.bias_bound;
  bool pair_ok = std::fabs(out.lhs.mean - out.rhs.mean) <= 4.0 * comb + 2.0 * out.bias_bound;
  out.pass = lhs_ok && rhs_ok && pair_ok && out.negative_determinants == 0;
  out.pass_limit_form =
      std::fabs(out.lhs.mean - out.product_limit) <= 4.0 * sl + out.bias_bound + out.discretization_gap;
  return out;
}

LevyMeasureReport levy_measure_d1(double a, double q, const Vec& t_grid, const Vec& lambda_grid) {
  if (!(q > 0.0)) throw std::invalid_argument("levy_measure_d1: q must be positive");
  LevyMeasureReport out;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("levy_measure_d1: t grid must be positive");
    out.density.push_back({t, normal_pdf(0.0, a * t, q * t) / t});
  }
  const double b = a * a / (2.0 * q);
  const double c = 2.0 / std::sqrt(2.0 * M_PI * q);
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0)) throw std::invalid_argument("levy_measure_d1: lambda grid must be positive");
    // substitution t = u^2: integrand c (1 - e^{-lambda u^2}) u^{-2} e^{-b u^2}
    auto f = [&](double u) {
      if (u < 1e-9) return c * lambda * std::exp(-b * u * u);
      return c * (-std::expm1(-lambda * u * u)) / (u * u) * std::exp(-b * u * u);
    };
    double quad, tail = 0.0;
    if (a != 0.0) {
      double U = std::sqrt(80.0 * q) / std::fabs(a);
      quad = adaptive_simpson(f, 0.0, U, 1e-9);
    } else {
      double U = std::sqrt(80.0 / lambda);
      quad = adaptive_simpson(f, 0.0, U, 1e-9);
      tail = c / U;  // int_U^inf u^{-2} du, the e^{-lambda u^2} remainder < e^{-80}
    }
    double value = quad + tail;
    double closed = (a + std::sqrt(a * a + 2.0 * q * lambda)) / q - (a + std::fabs(a)) / q;
    out.exponent_check.push_back({lambda, value, closed});
    out.max_error = std::max(out.max_error, std::fabs(value - closed));
  }
  return out;
}

double first_passage_density_point_mass(const PointMassOffdiag& spec, const Vec& r, const Vec& t) {
  const int d = static_cast<int>(r.size());
  Mat xbar(d, d, 0.0);
  for (int i = 0; i < d; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      xbar(i, j) = spec.offdiag_slopes(i, j) * t[j];
      rowsum += xbar(i, j);
    }
    xbar(i, i) = -rowsum;
  }
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = (i == j ? r[i] : 0.0) - xbar(i, j);
  double determinant = det(m);
  double dens = 1.0, tprod = 1.0;
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j = 0; j < d; ++j)
      if (j != i) off += xbar(i, j);
    dens *= spec.diag_density(i, -r[i] - off, t[i]);
    tprod *= t[i];
  }
  return determinant * dens / tprod;
}

double first_passage_density_quadrature(int d, const std::function<double(const Mat&)>& p_t, const Vec& r,
                                        const Vec& t, double box, double tol, long long budget) {
  for (double tj : t)
    if (!(tj > 0.0)) throw std::invalid_argument("first_passage_density_quadrature: t must be positive");
  double tprod = 1.0;
  for (double tj : t) tprod *= tj;
  if (d == 1) {
    Mat x(1, 1);
    x(0, 0) = -r[0];
    return r[0] * p_t(x) / tprod;
  }
  if (d != 2) throw std::invalid_argument("first_passage_density_quadrature: implemented for d <= 2");
  long long evals = 0;
  auto integrand = [&](double x12, double x21) {
    if (++evals > budget) throw resource_error("first_passage_density_quadrature: budget exceeded");
    double determinant = (r[0] + x12) * (r[1] + x21) - x12 * x21;
    Mat xhat(2, 2);
    xhat(0, 0) = -r[0];
    xhat(1, 1) = -r[1];
    xhat(0, 1) = x12;
    xhat(1, 0) = x21;
    return determinant * p_t(xhat);
  };
  auto outer = [&](double x21) {
    return adaptive_simpson([&](double x12) { return integrand(x12, x21); }, 0.0, box, tol * 0.5 / box);
  };
  return adaptive_simpson(outer, 0.0, box, tol * 0.5) / tprod;
}

}  // namespace spalf
