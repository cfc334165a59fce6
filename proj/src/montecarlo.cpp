#include "spalf/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spalf/errors.hpp"
#include "spalf/inversion.hpp"
#include "spalf/numerics.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"

namespace spalf {

namespace {

struct LatticeHitter {
  ModelSampler sampler;
  Vec r;
  std::vector<long long> r_units;
  double horizon;

  LatticeHitter(const ModelSpec& model, const Vec& r_in, double horizon_in)
      : sampler(model), r(r_in), r_units(model.grid_units(r_in)), horizon(horizon_in) {
    for (double v : r)
      if (v < 0.0) throw std::invalid_argument("sample_hitting: r must be componentwise nonnegative");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_hitting: horizon must be positive");
  }

  HittingResult run(std::mt19937_64& rng, PathBundle& workspace) const {
    sampler.sample_path(rng, horizon, workspace);
    HittingResult hit = smallest_solution(workspace, r);
    const int d = workspace.d;
    for (int i = 0; i < d; ++i) {
      if (!hit.hit(i)) continue;
      long long row = 0;
      for (int j = 0; j < d; ++j) row += hit.matrix_units[static_cast<size_t>(i) * d + j];
      if (row != -r_units[i])
        throw numeric_error("sample_hitting: row identity violated on a hit row");
    }
    return hit;
  }
};

Vec require_inverse(const ExponentOracle& oracle, const Vec& target) {
  InversionResult inv = invert_exponent(oracle, target);
  if (!inv.converged) throw numeric_error("verification: exponent inversion did not converge");
  return inv.value;
}

}  // namespace

std::vector<HittingResult> sample_hitting(const ModelSpec& model, const Vec& r, double horizon, long long n,
                                          std::uint64_t seed) {
  LatticeHitter hitter(model, r, horizon);
  std::vector<HittingResult> out;
  out.reserve(static_cast<size_t>(n));
  PathBundle ws;
  for (long long i = 0; i < n; ++i) {
    std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(hitter.run(rng, ws));
  }
  return out;
}

LaplaceCheck verify_laplace_T(const ModelSpec& model, const Vec& r, const Vec& lambda, double horizon,
                              long long n, std::uint64_t seed, int workers) {
  const int d = model.d;
  double lambda_min = lambda[0];
  for (double v : lambda) {
    if (!(v > 0.0)) throw std::invalid_argument("verify_laplace_T: lambda must be componentwise positive");
    lambda_min = std::min(lambda_min, v);
  }
  LatticeHitter hitter(model, r, horizon);
  Accumulator acc = parallel_reduce<Accumulator>(
      n, workers, Accumulator{},
      [&](Accumulator& a, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx));
        thread_local PathBundle ws;
        HittingResult hit = hitter.run(rng, ws);
        if (!hit.all_hit) {
          a.add_censored();
          return;
        }
        double e = 0.0;
        for (int j = 0; j < d; ++j) e += lambda[j] * hit.s[j];
        a.add(std::exp(-e));
      },
      [](const Accumulator& a, const Accumulator& b) { return a.merged(b); });

  LaplaceCheck out;
  out.mc = MCEstimate::from(acc, seed);
  ExponentOracle oracle{model};
  out.phibar = require_inverse(oracle, lambda);
  out.predicted = std::exp(-dot(out.phibar, r));
  out.bias_bound = std::exp(-lambda_min * horizon);
  out.pass = std::fabs(out.mc.mean - out.predicted) <= 4.0 * out.mc.stderr_ + out.bias_bound;
  return out;
}

FinitenessCheck verify_finiteness(const ModelSpec& model, const Vec& r, double horizon, long long n,
                                  std::uint64_t seed, int workers) {
  LatticeHitter hitter(model, r, horizon);
  struct Tally {
    Accumulator h4, h2, h1;
    Tally merged(const Tally& o) const { return {h4.merged(o.h4), h2.merged(o.h2), h1.merged(o.h1)}; }
  };
  Tally tally = parallel_reduce<Tally>(
      n, workers, Tally{},
      [&](Tally& a, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx));
        thread_local PathBundle ws;
        HittingResult full = hitter.run(rng, ws);
        a.h1.add(full.all_hit ? 1.0 : 0.0);
        // Common random numbers: the same path censored at H/2 and H/4.
        PathBundle view = ws;
        view.horizon = horizon * 0.5;
        a.h2.add(smallest_solution(view, hitter.r).all_hit ? 1.0 : 0.0);
        view.horizon = horizon * 0.25;
        a.h4.add(smallest_solution(view, hitter.r).all_hit ? 1.0 : 0.0);
      },
      [](const Tally& a, const Tally& b) { return a.merged(b); });

  FinitenessCheck out;
  out.mc = MCEstimate::from(tally.h1, seed);
  MCEstimate at2 = MCEstimate::from(tally.h2, seed);
  MCEstimate at4 = MCEstimate::from(tally.h4, seed);
  out.ladder = {at4.mean, at2.mean, out.mc.mean};
  ExponentOracle oracle{model};
  Vec phi0 = phi_at_zero(oracle);
  out.predicted = std::exp(-dot(phi0, r));
  // Geometric-tail allowance for P(hit) - P(hit by H), convergence ratio <= 3/4.
  out.bias_bound = 3.0 * std::max(0.0, out.mc.mean - at2.mean);
  bool below = out.mc.mean <= out.predicted + 4.0 * out.mc.stderr_;
  bool close = out.predicted - out.mc.mean <= 4.0 * out.mc.stderr_ + out.bias_bound;
  bool monotone = out.ladder[0] <= out.ladder[1] + 1e-12 && out.ladder[1] <= out.ladder[2] + 1e-12;
  out.pass = below && close && monotone;
  return out;
}

IncrementsCheck verify_increments(const ModelSpec& model, const Vec& r, const Vec& r_prime, double horizon,
                                  long long n, std::uint64_t seed, int workers) {
  const int d = model.d;
  Vec r_total(d);
  for (int i = 0; i < d; ++i) r_total[i] = r[i] + r_prime[i];
  LatticeHitter direct(model, r_total, horizon);
  LatticeHitter first(model, r, horizon);
  LatticeHitter second(model, r_prime, horizon);

  struct Samples {
    std::vector<Vec> direct, sum;
    Samples merged(Samples o) const {
      Samples out = *this;
      out.direct.insert(out.direct.end(), o.direct.begin(), o.direct.end());
      out.sum.insert(out.sum.end(), o.sum.begin(), o.sum.end());
      return out;
    }
  };
  Samples samples = parallel_reduce<Samples>(
      n, workers, Samples{},
      [&](Samples& a, long long idx) {
        thread_local PathBundle ws;
        std::mt19937_64 rng1 = replicate_rng(seed, static_cast<std::uint64_t>(idx), 1);
        HittingResult h = direct.run(rng1, ws);
        if (h.all_hit) a.direct.push_back(h.s);
        std::mt19937_64 rng2 = replicate_rng(seed, static_cast<std::uint64_t>(idx), 2);
        HittingResult ha = first.run(rng2, ws);
        std::mt19937_64 rng3 = replicate_rng(seed, static_cast<std::uint64_t>(idx), 3);
        HittingResult hb = second.run(rng3, ws);
        if (ha.all_hit && hb.all_hit) {
          Vec s(d);
          for (int i = 0; i < d; ++i) s[i] = ha.s[i] + hb.s[i];
          a.sum.push_back(std::move(s));
        }
      },
      [](const Samples& a, const Samples& b) { return a.merged(b); });

  IncrementsCheck out;
  out.n_direct = static_cast<long long>(samples.direct.size());
  out.n_sum = static_cast<long long>(samples.sum.size());
  if (out.n_direct < 1000 || out.n_sum < 1000)
    throw resource_error("verify_increments: fewer than 1e3 uncensored samples");
  out.pass = true;
  for (int i = 0; i < d; ++i) {
    std::vector<double> x, y;
    x.reserve(samples.direct.size());
    y.reserve(samples.sum.size());
    for (const auto& s : samples.direct) x.push_back(s[i]);
    for (const auto& s : samples.sum) y.push_back(s[i]);
    auto [stat, p] = ks_two_sample(x, y);
    out.ks_statistic.push_back(stat);
    out.p_value.push_back(p);
    if (p < 1e-4) out.pass = false;
  }
  return out;
}

BivariateCheck verify_bivariate_laplace(const ModelSpec& model, const Vec& r, const Vec& lambda, const Mat& mu,
                                        double horizon, long long n, std::uint64_t seed, int workers) {
  const int d = model.d;
  ExponentOracle oracle{model};
  for (int j = 0; j < d; ++j)
    if (lambda[j] < oracle.eval_col(j, mu.column(j)) - 1e-12)
      throw std::invalid_argument("verify_bivariate_laplace: (lambda, mu) outside M_phi");
  LatticeHitter hitter(model, r, horizon);
  Accumulator acc = parallel_reduce<Accumulator>(
      n, workers, Accumulator{},
      [&](Accumulator& a, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx));
        thread_local PathBundle ws;
        HittingResult hit = hitter.run(rng, ws);
        if (!hit.all_hit) {
          a.add_censored();
          return;
        }
        double e = 0.0;
        for (int j = 0; j < d; ++j) e += lambda[j] * hit.s[j];
        e += special_product(mu, hit.matrix_at);
        a.add(std::exp(-e));
      },
      [](const Accumulator& a, const Accumulator& b) { return a.merged(b); });

  BivariateCheck out;
  out.mc = MCEstimate::from(acc, seed);
  out.big_phi_value = big_phi(oracle, lambda, mu);
  out.predicted = std::exp(-dot(out.big_phi_value, r));
  // Censoring allowance: E[f ; T_j > H] <= e^{-eps_j H} e^{-<r, Phi(lambda - eps_j e_j, mu)>}
  // for eps_j = (lambda_j - phi_j(mu^(j))) / 2, summed over coordinates.
  out.bias_bound = 0.0;
  for (int j = 0; j < d; ++j) {
    double margin = lambda[j] - oracle.eval_col(j, mu.column(j));
    double eps = 0.5 * margin;
    if (!(eps > 0.0)) {
      out.bias_bound += 1.0;  // boundary component: no useful bound
      continue;
    }
    Vec shifted = lambda;
    shifted[j] -= eps;
    Vec phi_shift = big_phi(oracle, shifted, mu);
    out.bias_bound += std::exp(-eps * horizon) * std::exp(-dot(phi_shift, r));
  }
  out.pass = std::fabs(out.mc.mean - out.predicted) <= 4.0 * out.mc.stderr_ + out.bias_bound;
  return out;
}

double hitting_correlation(const ModelSpec& model, double r, double horizon, long long n, std::uint64_t seed,
                           int workers) {
  if (model.d < 2) throw std::invalid_argument("hitting_correlation: requires d >= 2");
  Vec r1(model.d, 0.0), r2(model.d, 0.0);
  r1[0] = r;
  r2[1] = r;
  LatticeHitter h1(model, r1, horizon);
  LatticeHitter h2(model, r2, horizon);
  struct Moments {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    long long n = 0;
    Moments merged(const Moments& o) const {
      return {sx + o.sx, sy + o.sy, sxx + o.sxx, syy + o.syy, sxy + o.sxy, n + o.n};
    }
  };
  Moments m = parallel_reduce<Moments>(
      n, workers, Moments{},
      [&](Moments& a, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx));
        thread_local PathBundle ws;
        // Both levels evaluated on the same realized field (common path).
        h1.sampler.sample_path(rng, horizon, ws);
        HittingResult a1 = smallest_solution(ws, r1);
        HittingResult a2 = smallest_solution(ws, r2);
        if (!a1.all_hit || !a2.all_hit) return;
        double x = a1.s[0], y = a2.s[1];
        a.sx += x; a.sy += y; a.sxx += x * x; a.syy += y * y; a.sxy += x * y;
        ++a.n;
      },
      [](const Moments& a, const Moments& b) { return a.merged(b); });
  if (m.n < 2) return 0.0;
  double cx = m.sxx - m.sx * m.sx / m.n, cy = m.syy - m.sy * m.sy / m.n, cxy = m.sxy - m.sx * m.sy / m.n;
  return cx > 0 && cy > 0 ? cxy / std::sqrt(cx * cy) : 0.0;
}

}  // namespace spalf
