#include "spalf/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "spalf/errors.hpp"
#include "spalf/numerics.hpp"
#include "spalf/rng.hpp"
#include "spalf/sampling.hpp"
#include "spalf/solver.hpp"

namespace spalf {

void StepLaw::validate() const {
  if (d <= 0 || k <= 0) throw std::invalid_argument("StepLaw: bad dimension or resolution");
  if (static_cast<int>(cols.size()) != d) throw std::invalid_argument("StepLaw: one table per column required");
  for (int j = 0; j < d; ++j) {
    if (cols[j].empty()) throw std::invalid_argument("StepLaw: empty support");
    Rational total(0);
    for (const auto& e : cols[j]) {
      if (static_cast<int>(e.units.size()) != d) throw std::invalid_argument("StepLaw: step vector length mismatch");
      for (int i = 0; i < d; ++i) {
        if (i == j && e.units[i] < -1) throw std::invalid_argument("StepLaw: diagonal steps must be >= -1/k");
        if (i != j && e.units[i] < 0) throw std::invalid_argument("StepLaw: off-diagonal steps must be >= 0");
      }
      if (e.prob.num() < 0 || e.prob.is_zero()) throw std::invalid_argument("StepLaw: probabilities must be positive");
      total += e.prob;
    }
    if (total != Rational(1)) throw std::invalid_argument("StepLaw: probabilities must sum to exactly 1");
  }
}

StepLaw StepLaw::simple_walk(const Rational& p_up) {
  StepLaw law;
  law.d = 1;
  law.k = 1;
  law.cols.resize(1);
  law.cols[0].push_back({{1}, p_up});
  law.cols[0].push_back({{-1}, Rational(1) - p_up});
  law.validate();
  return law;
}

PathBundle WalkBundle::embed(const StepLaw& law) const {
  std::vector<std::vector<std::pair<double, std::vector<long long>>>> events(d);
  double horizon = 1.0;
  for (int j = 0; j < d; ++j) {
    for (size_t s = 0; s < steps[j].size(); ++s)
      events[j].push_back({static_cast<double>(s + 1), law.cols[j][steps[j][s]].units});
    horizon = std::max(horizon, static_cast<double>(steps[j].size()));
  }
  return PathBundle::lattice(d, horizon, k, events);
}

namespace {

long long det_units(const std::vector<std::vector<long long>>& m) {
  const int d = static_cast<int>(m.size());
  if (d == 1) return m[0][0];
  if (d == 2) {
    __int128 v = static_cast<__int128>(m[0][0]) * m[1][1] - static_cast<__int128>(m[0][1]) * m[1][0];
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("det_units: overflow");
    return static_cast<long long>(v);
  }
  if (d == 3) {
    __int128 v = static_cast<__int128>(m[0][0]) * (static_cast<__int128>(m[1][1]) * m[2][2] - static_cast<__int128>(m[1][2]) * m[2][1]) -
                 static_cast<__int128>(m[0][1]) * (static_cast<__int128>(m[1][0]) * m[2][2] - static_cast<__int128>(m[1][2]) * m[2][0]) +
                 static_cast<__int128>(m[0][2]) * (static_cast<__int128>(m[1][0]) * m[2][1] - static_cast<__int128>(m[1][1]) * m[2][0]);
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("det_units: overflow");
    return static_cast<long long>(v);
  }
  throw std::invalid_argument("det_units: dimensions above 3 are out of scope");
}

// Per-column exact distribution of S^{(j)}_{n_j} as a map from the column vector
// (grid units) to its probability.
std::map<std::vector<long long>, Rational> column_distribution(const StepLaw& law, int j, int n) {
  std::map<std::vector<long long>, Rational> dp;
  dp[std::vector<long long>(law.d, 0)] = Rational(1);
  for (int s = 0; s < n; ++s) {
    std::map<std::vector<long long>, Rational> next;
    for (const auto& [pos, p] : dp)
      for (const auto& e : law.cols[j]) {
        std::vector<long long> q = pos;
        for (int i = 0; i < law.d; ++i) q[i] += e.units[i];
        auto it = next.find(q);
        if (it == next.end()) next.emplace(std::move(q), p * e.prob);
        else it->second += p * e.prob;
      }
    dp = std::move(next);
  }
  return dp;
}

}  // namespace

BallotResult ballot_exact(const StepLaw& law, const std::vector<int>& n,
                          const std::vector<std::vector<long long>>& x_units, long long budget) {
  law.validate();
  const int d = law.d;
  if (static_cast<int>(n.size()) != d) throw std::invalid_argument("ballot_exact: n has wrong length");
  if (static_cast<int>(x_units.size()) != d) throw std::invalid_argument("ballot_exact: x has wrong shape");
  std::vector<long long> r_units(d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(x_units[i].size()) != d) throw std::invalid_argument("ballot_exact: x has wrong shape");
    long long row = 0;
    for (int j = 0; j < d; ++j) {
      if (i != j && x_units[i][j] < 0) throw std::invalid_argument("ballot_exact: x must be essentially nonnegative");
      row += x_units[i][j];
    }
    if (row > 0) throw std::invalid_argument("ballot_exact: x * 1 must be <= 0");
    r_units[i] = -row;
  }
  for (int j = 0; j < d; ++j)
    if (n[j] <= 0) throw std::invalid_argument("ballot_exact: step counts must be positive");

  double configs = 1.0;
  for (int j = 0; j < d; ++j) configs *= std::pow(static_cast<double>(law.cols[j].size()), n[j]);
  if (configs > static_cast<double>(budget))
    throw resource_error("ballot_exact: enumeration budget exceeded");

  // lhs: exhaustive enumeration, first hitting evaluated by the path solver on
  // the embedded unit-time bundle.
  Vec r(d);
  for (int i = 0; i < d; ++i) r[i] = static_cast<double>(r_units[i]) / law.k;
  WalkBundle walk;
  walk.d = d;
  walk.k = law.k;
  walk.steps.assign(d, {});
  for (int j = 0; j < d; ++j) walk.steps[j].assign(n[j], 0);

  Rational lhs(0);
  long long count = 0;
  std::vector<int> sizes(d);
  for (int j = 0; j < d; ++j) sizes[j] = static_cast<int>(law.cols[j].size());
  bool done = false;
  while (!done) {
    ++count;
    Rational prob(1);
    for (int j = 0; j < d; ++j)
      for (int s = 0; s < n[j]; ++s) prob *= law.cols[j][walk.steps[j][s]].prob;
    PathBundle path = walk.embed(law);
    HittingResult hit = smallest_solution(path, r);
    bool match = hit.all_hit;
    for (int j = 0; j < d && match; ++j)
      if (hit.s[j] != static_cast<double>(n[j])) match = false;
    for (int i = 0; i < d && match; ++i)
      for (int j = 0; j < d && match; ++j)
        if (hit.matrix_units[static_cast<size_t>(i) * d + j] != x_units[i][j]) match = false;
    if (match) lhs += prob;

    // odometer over all step configurations
    done = true;
    for (int j = 0; j < d && done; ++j)
      for (int s = 0; s < n[j] && done; ++s) {
        if (++walk.steps[j][s] < sizes[j]) done = false;
        else walk.steps[j][s] = 0;
      }
  }

  // rhs: exact convolution probability and integer determinant.
  Rational p_sn(1);
  for (int j = 0; j < d; ++j) {
    auto dp = column_distribution(law, j, n[j]);
    std::vector<long long> colv(d);
    for (int i = 0; i < d; ++i) colv[i] = x_units[i][j];
    auto it = dp.find(colv);
    if (it == dp.end()) p_sn = Rational(0);
    else p_sn *= it->second;
  }
  std::vector<std::vector<long long>> neg(d, std::vector<long long>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) neg[i][j] = -x_units[i][j];
  long long steps_product = 1;
  for (int j = 0; j < d; ++j) steps_product *= n[j];
  BallotResult out;
  out.lhs = lhs;
  out.rhs = Rational(det_units(neg), steps_product) * p_sn;
  out.equal = (out.lhs == out.rhs);
  out.configurations = count;
  return out;
}

std::vector<std::pair<std::vector<long long>, Rational>> reachable_levels(const StepLaw& law,
                                                                          const std::vector<int>& n) {
  const int d = law.d;
  std::vector<std::map<std::vector<long long>, Rational>> dps(d);
  for (int j = 0; j < d; ++j) dps[j] = column_distribution(law, j, n[j]);
  std::vector<std::pair<std::vector<long long>, Rational>> out;
  std::vector<std::map<std::vector<long long>, Rational>::const_iterator> its(d);
  for (int j = 0; j < d; ++j) its[j] = dps[j].begin();
  while (true) {
    std::vector<long long> x(static_cast<size_t>(d) * d);
    Rational p(1);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) x[static_cast<size_t>(i) * d + j] = its[j]->first[i];
      p *= its[j]->second;
    }
    bool ok = true;
    for (int i = 0; i < d && ok; ++i) {
      long long row = 0;
      for (int j = 0; j < d; ++j) row += x[static_cast<size_t>(i) * d + j];
      if (row > 0) ok = false;
    }
    if (ok) out.push_back({std::move(x), p});
    int j = 0;
    while (j < d && ++its[j] == dps[j].end()) {
      its[j] = dps[j].begin();
      ++j;
    }
    if (j == d) break;
  }
  return out;
}

PoissonizedPath poissonize(const StepLaw& law, const Vec& rates, double horizon, std::mt19937_64& rng) {
  law.validate();
  const int d = law.d;
  if (static_cast<int>(rates.size()) != d) throw std::invalid_argument("poissonize: rates length mismatch");
  for (double r : rates)
    if (!(r > 0.0)) throw std::invalid_argument("poissonize: rates must be positive");
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PoissonizedPath out;
  out.steps.assign(d, {});
  std::vector<std::vector<std::pair<double, std::vector<long long>>>> events(d);
  for (int j = 0; j < d; ++j) {
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& e : law.cols[j]) {
      acc += e.prob.to_double();
      cum.push_back(acc);
    }
    cum.back() = 1.0;
    double t = 0.0;
    while (true) {
      t += exp1(rng) / rates[j];
      if (t > horizon) break;
      int idx = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), unif(rng)) - cum.begin());
      idx = std::min<int>(idx, static_cast<int>(law.cols[j].size()) - 1);
      out.steps[j].push_back(idx);
      events[j].push_back({t, law.cols[j][idx].units});
    }
  }
  out.path = PathBundle::lattice(d, horizon, law.k, events);
  return out;
}

ModelSpec approximate_levy(const ModelSpec& model, int k) {
  if (model.is_lattice()) throw std::invalid_argument("approximate_levy: model is already a lattice family");
  if (k <= 0) throw std::invalid_argument("approximate_levy: k must be positive");
  const int d = model.d;
  std::vector<std::vector<JumpComponent>> comps(d);
  for (int j = 0; j < d; ++j) {
    for (const auto& c : model.jumps[j]) {
      double norm = 0.0;
      for (double x : c.delta) norm += x * x;
      if (std::sqrt(norm) < 1.0 / k) continue;  // below-grid jumps dropped
      JumpComponent out;
      out.rate = c.rate;
      out.units.resize(d);
      out.delta.assign(d, 0.0);
      bool nonzero = false;
      for (int i = 0; i < d; ++i) {
        out.units[i] = static_cast<long long>(std::floor(c.delta[i] * k));
        out.delta[i] = static_cast<double>(out.units[i]) / k;
        if (out.units[i] != 0) nonzero = true;
      }
      if (nonzero) comps[j].push_back(std::move(out));
    }
    if (model.diffusion[j] > 0.0) {
      double rate = 0.5 * model.diffusion[j] * k * k;
      for (int sign : {+1, -1}) {
        JumpComponent c;
        c.rate = rate;
        c.units.assign(d, 0);
        c.delta.assign(d, 0.0);
        c.units[j] = sign;
        c.delta[j] = static_cast<double>(sign) / k;
        comps[j].push_back(std::move(c));
      }
    }
  }
  return ModelSpec::lattice(k, model.drift, std::move(comps));
}

JointLawCheck discrete_joint_law_check(const ModelSpec& model, const Vec& r, const Vec& t,
                                       const std::vector<std::vector<long long>>& x_units, long long n_samples,
                                       double bandwidth, std::uint64_t seed, int workers) {
  if (!model.is_lattice()) throw std::invalid_argument("discrete_joint_law_check: lattice model required");
  const int d = model.d;
  for (double tj : t)
    if (!(tj > 0.0)) throw std::invalid_argument("discrete_joint_law_check: t must be componentwise positive");
  ModelSampler sampler(model);
  std::vector<long long> r_units = model.grid_units(r);
  std::vector<long long> x_flat(static_cast<size_t>(d) * d);
  std::vector<std::vector<long long>> neg(d, std::vector<long long>(d));
  for (int i = 0; i < d; ++i) {
    long long row = 0;
    for (int j = 0; j < d; ++j) {
      if (i != j && x_units[i][j] < 0)
        throw std::invalid_argument("discrete_joint_law_check: x must be essentially nonnegative");
      row += x_units[i][j];
      x_flat[static_cast<size_t>(i) * d + j] = x_units[i][j];
      neg[i][j] = -x_units[i][j];
    }
    if (row != -r_units[i])
      throw std::invalid_argument("discrete_joint_law_check: x * 1 must equal -r on the grid");
  }

  const double w = bandwidth;
  double horizon = 0.0;
  for (double tj : t) horizon = std::max(horizon, tj);
  horizon += w;

  struct Tally {
    Accumulator coarse, fine;
    Tally merged(const Tally& o) const { return {coarse.merged(o.coarse), fine.merged(o.fine)}; }
  };
  double cell_coarse = 1.0, cell_fine = 1.0;
  for (int j = 0; j < d; ++j) {
    cell_coarse *= w;
    cell_fine *= 0.5 * w;
  }
  Tally tally = parallel_reduce<Tally>(
      n_samples, workers, Tally{},
      [&](Tally& acc, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx), 1);
        thread_local PathBundle bundle;
        sampler.sample_path(rng, horizon, bundle);
        HittingResult hit = smallest_solution(bundle, r);
        if (!hit.all_hit) {
          // unresolved replicates lie beyond t + w/2 and contribute exactly 0
          acc.coarse.add_censored();
          acc.fine.add_censored();
          return;
        }
        bool in_coarse = true, in_fine = true;
        for (int j = 0; j < d && in_coarse; ++j) {
          double dt = std::fabs(hit.s[j] - t[j]);
          if (dt > 0.5 * w) in_coarse = false;
          if (dt > 0.25 * w) in_fine = false;
        }
        if (in_coarse && hit.matrix_units != x_flat) in_coarse = in_fine = false;
        acc.coarse.add(in_coarse ? 1.0 / cell_coarse : 0.0);
        acc.fine.add(in_fine && in_coarse ? 1.0 / cell_fine : 0.0);
      },
      [](const Tally& a, const Tally& b) { return a.merged(b); });

  Accumulator prob_acc = parallel_reduce<Accumulator>(
      n_samples, workers, Accumulator{},
      [&](Accumulator& acc, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx), 2);
        thread_local std::vector<long long> units;
        sampler.sample_matrix_at(rng, t, units);
        acc.add(units == x_flat ? 1.0 : 0.0);
      },
      [](const Accumulator& a, const Accumulator& b) { return a.merged(b); });

  JointLawCheck out;
  out.bandwidth = 0.5 * w;
  out.lhs = MCEstimate::from(tally.fine, seed);
  MCEstimate coarse = MCEstimate::from(tally.coarse, seed);
  out.smoothing_bias = std::fabs(coarse.mean - out.lhs.mean);
  out.rhs_prob = MCEstimate::from(prob_acc, seed);
  double tprod = 1.0;
  for (double tj : t) tprod *= tj;
  double factor = static_cast<double>(det_units(neg)) / tprod;
  out.rhs_value = factor * out.rhs_prob.mean;
  out.rhs_stderr = std::fabs(factor) * out.rhs_prob.stderr_;
  double sigma = std::sqrt(out.lhs.stderr_ * out.lhs.stderr_ + out.rhs_stderr * out.rhs_stderr);
  out.pass = std::fabs(out.lhs.mean - out.rhs_value) <= 4.0 * sigma + out.smoothing_bias;
  return out;
}

StepLaw random_step_law(std::mt19937_64& rng, int d, int k, int max_support, int max_weight) {
  std::uniform_int_distribution<int> supp(2, max_support);
  std::uniform_int_distribution<int> weight(1, max_weight);
  std::uniform_int_distribution<int> diag_step(-1, 1);
  std::uniform_int_distribution<int> off_step(0, 1);
  StepLaw law;
  law.d = d;
  law.k = k;
  law.cols.resize(d);
  // distinct step vectors available: 3 diagonal choices x 2 per off-diagonal
  const int distinct = 3 << (d - 1);
  for (int j = 0; j < d; ++j) {
    int ns = std::min(supp(rng), distinct);
    std::vector<std::vector<long long>> seen;
    // always include a pure death step so hitting is possible
    seen.push_back(std::vector<long long>(d, 0));
    seen.back()[j] = -1;
    while (static_cast<int>(seen.size()) < ns) {
      std::vector<long long> u(d);
      for (int i = 0; i < d; ++i) u[i] = (i == j) ? diag_step(rng) : off_step(rng);
      if (std::find(seen.begin(), seen.end(), u) == seen.end()) seen.push_back(std::move(u));
    }
    long long total = 0;
    std::vector<long long> ws(seen.size());
    for (auto& wgt : ws) {
      wgt = weight(rng);
      total += wgt;
    }
    for (size_t s = 0; s < seen.size(); ++s)
      law.cols[j].push_back({seen[s], Rational(ws[s], total)});
  }
  law.validate();
  return law;
}

}  // namespace spalf
