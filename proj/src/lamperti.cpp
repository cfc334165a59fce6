#include "spalf/lamperti.hpp"

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

// Incremental reader of column prefix sums along nondecreasing load arguments.
struct LoadCursor {
  const PathBundle* b = nullptr;
  std::vector<int> idx;  // events consumed per column

  void reset(const PathBundle& bundle) {
    b = &bundle;
    idx.assign(bundle.d, 0);
  }
  // Advances column j to load value t and returns the unit value of coordinate i.
  void advance(int j, double t) {
    const auto& times = b->cols[j].times;
    int m = static_cast<int>(times.size());
    while (idx[j] < m && times[idx[j]] <= t) ++idx[j];
  }
  long long unit(int i, int j) const { return b->cum_units_at(i, j, idx[j]); }
};

struct Stepper {
  const PathBundle* b;
  int d, k;
  std::vector<long long> r_units;
  std::vector<long long> z_units;  // population in grid units
  Vec load;
  LoadCursor cursor;
  bool extinct = false;

  Stepper(const PathBundle& bundle, const std::vector<long long>& r_in)
      : b(&bundle), d(bundle.d), k(bundle.k), r_units(r_in), z_units(r_in), load(bundle.d, 0.0) {
    cursor.reset(bundle);
    update();
  }

  void rebind(const PathBundle& bundle) {
    // After an in-place horizon extension the prefix arrays are reallocated, so
    // recover the cursor positions from the load values.
    b = &bundle;
    cursor.reset(bundle);
    for (int j = 0; j < d; ++j) cursor.advance(j, load[j]);
  }

  // Recomputes Z from the current loads; returns true if newly extinct.
  bool update() {
    bool all_nonpositive = true;
    for (int i = 0; i < d; ++i) {
      long long u = r_units[i];
      for (int j = 0; j < d; ++j) u += cursor.unit(i, j);
      if (u > 0) all_nonpositive = false;
      z_units[i] = std::max<long long>(u, 0);
    }
    if (all_nonpositive) {
      extinct = true;
      for (int i = 0; i < d; ++i) z_units[i] = 0;
    }
    return extinct;
  }

  double max_load_needed(double h) const {
    double m = 0.0;
    for (int j = 0; j < d; ++j) m = std::max(m, load[j] + h * static_cast<double>(z_units[j]) / k);
    return m;
  }

  void step(double h) {
    for (int j = 0; j < d; ++j) {
      load[j] += h * static_cast<double>(z_units[j]) / k;
      cursor.advance(j, load[j]);
    }
    update();
  }

  long long total_units() const {
    long long s = 0;
    for (long long u : z_units) s += u;
    return s;
  }
};

}  // namespace

LampertiResult solve_lamperti(const PathBundle& paths, const Vec& r, double h, double t_max,
                              long long record_stride) {
  if (!paths.is_lattice()) throw std::invalid_argument("solve_lamperti: lattice driver required");
  if (!(h > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("solve_lamperti: h and t_max must be positive");
  std::vector<long long> r_units(paths.d);
  for (int i = 0; i < paths.d; ++i) {
    double x = r[i] * paths.k;
    r_units[i] = std::llround(x);
    if (r_units[i] < 0 || std::fabs(x - r_units[i]) > 1e-6)
      throw std::invalid_argument("solve_lamperti: r must be nonnegative on the 1/k grid");
  }

  Stepper st(paths, r_units);
  LampertiResult out;
  auto record = [&](double t) {
    BranchingState s;
    s.t = t;
    s.z.resize(paths.d);
    for (int i = 0; i < paths.d; ++i) s.z[i] = static_cast<double>(st.z_units[i]) / paths.k;
    s.load = st.load;
    s.extinct = st.extinct;
    out.trajectory.push_back(std::move(s));
  };

  double t = 0.0;
  if (record_stride > 0) record(t);
  long long steps = static_cast<long long>(std::ceil(t_max / h));
  for (long long n = 0; n < steps && !st.extinct; ++n) {
    if (st.max_load_needed(h) > paths.horizon)
      throw resource_error("solve_lamperti: loads exceed the driver horizon; enlarge H");
    st.step(h);
    t += h;
    ++out.steps;
    if (record_stride > 0 && (out.steps % record_stride == 0 || st.extinct)) record(t);
  }
  out.extinct = st.extinct;
  out.extinction_time = st.extinct ? t : t_max;
  out.load_at_extinction = st.load;
  out.z_final.resize(paths.d);
  for (int i = 0; i < paths.d; ++i) out.z_final[i] = static_cast<double>(st.z_units[i]) / paths.k;
  return out;
}

bool check_load_identity(const LampertiResult& trajectory, const HittingResult& hitting, double tol) {
  if (!trajectory.extinct) throw std::invalid_argument("check_load_identity: trajectory did not reach extinction");
  const int d = static_cast<int>(trajectory.load_at_extinction.size());
  for (int j = 0; j < d; ++j) {
    if (!hitting.hit(j)) return false;
    if (std::fabs(trajectory.load_at_extinction[j] - hitting.s[j]) > tol) return false;
  }
  return true;
}

ExtinctionCheck extinction_probability(const ModelSpec& model, const Vec& r, double t_max, long long n,
                                       std::uint64_t seed, double h, long long escape_units, int workers) {
  if (!model.is_lattice()) throw std::invalid_argument("extinction_probability: lattice model required");
  const int d = model.d;
  ModelSampler sampler(model);
  std::vector<long long> r_units = model.grid_units(r);
  long long escape = escape_units;
  for (long long u : r_units) escape += u;

  struct Tally {
    Accumulator q1, q2, q4;
    Tally merged(const Tally& o) const { return {q1.merged(o.q1), q2.merged(o.q2), q4.merged(o.q4)}; }
  };
  Tally tally = parallel_reduce<Tally>(
      n, workers, Tally{},
      [&](Tally& acc, long long idx) {
        std::mt19937_64 rng = replicate_rng(seed, static_cast<std::uint64_t>(idx), 0);
        thread_local PathBundle ws;
        double horizon = 4.0;
        sampler.sample_path(rng, horizon, ws);
        Stepper st(ws, r_units);
        int window = 1;
        double t = 0.0;
        double t_ext = -1.0;
        long long steps = static_cast<long long>(std::ceil(t_max / h));
        for (long long m = 0; m < steps && !st.extinct; ++m) {
          if (st.total_units() >= escape) break;  // survivor beyond doubt
          while (st.max_load_needed(h) > ws.horizon) {
            std::mt19937_64 ext_rng = replicate_rng(seed, static_cast<std::uint64_t>(idx),
                                                    100 + static_cast<std::uint64_t>(window));
            sampler.extend_path(ext_rng, ws.horizon * 2.0, ws);
            ++window;
            st.rebind(ws);
          }
          st.step(h);
          t += h;
        }
        if (st.extinct) t_ext = t;
        acc.q1.add(t_ext >= 0.0 && t_ext <= t_max ? 1.0 : 0.0);
        acc.q2.add(t_ext >= 0.0 && t_ext <= 0.5 * t_max ? 1.0 : 0.0);
        acc.q4.add(t_ext >= 0.0 && t_ext <= 0.25 * t_max ? 1.0 : 0.0);
      },
      [](const Tally& a, const Tally& b) { return a.merged(b); });

  ExtinctionCheck out;
  out.mc = MCEstimate::from(tally.q1, seed);
  MCEstimate half = MCEstimate::from(tally.q2, seed);
  MCEstimate quarter = MCEstimate::from(tally.q4, seed);
  out.ladder = {quarter.mean, half.mean, out.mc.mean};
  ExponentOracle oracle{model};
  out.predicted = std::exp(-dot(phi_at_zero(oracle), r));
  out.bias_bound = 3.0 * std::max(0.0, out.mc.mean - half.mean);
  bool below = out.mc.mean <= out.predicted + 4.0 * out.mc.stderr_;
  bool close = out.predicted - out.mc.mean <= 4.0 * out.mc.stderr_ + out.bias_bound;
  out.pass = below && close;
  return out;
}

}  // namespace spalf
