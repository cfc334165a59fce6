#include "spalf/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "spalf/errors.hpp"

namespace spalf {

namespace {

// First epoch at which the diagonal of column i reaches -v (in grid units),
// scanning forward from event index `cursor`. Skip-freeness guarantees the level
// cannot be jumped over, so an exact equality scan is complete.
double lattice_first_passage(const PathBundle& b, int i, long long v_units, int& cursor) {
  if (v_units == 0) return 0.0;
  const PathColumn& col = b.cols[i];
  const int m = col.events();
  const size_t base = static_cast<size_t>(i) * (m + 1);
  for (int e = cursor + 1; e <= m; ++e) {
    if (col.cum_units[base + e] == -v_units) {
      cursor = e;
      // Bundles may carry events beyond a truncated censoring horizon.
      return col.times[e - 1] <= b.horizon ? col.times[e - 1] : kInfTime;
    }
  }
  cursor = m;
  return kInfTime;
}

// First t in [0, H] with left limit of the diagonal of column i equal to -v.
// The diagonal descends only through drift, so the crossing is a linear-segment
// solve; upward jumps never cross the level downward.
double continuous_first_passage(const PathBundle& b, int i, double v) {
  if (v == 0.0) return 0.0;
  const PathColumn& col = b.cols[i];
  const double slope = col.drift[i];
  const int m = col.events();
  const size_t base = static_cast<size_t>(i) * (m + 1);
  const double level = -v;
  double t_prev = 0.0;
  double y = 0.0;
  for (int e = 0; e <= m; ++e) {
    double t_next = (e < m) ? col.times[e] : b.horizon;
    if (t_next > t_prev && slope < 0.0) {
      double y_end = y + slope * (t_next - t_prev);
      if (y > level && y_end <= level) return t_prev + (level - y) / slope;
    }
    if (e < m) {
      y += slope * (col.times[e] - t_prev) + (col.cum[base + e + 1] - col.cum[base + e]);
      t_prev = col.times[e];
    }
  }
  return kInfTime;
}

bool column_coord_identically_zero(const PathBundle& b, int i, int j) {
  const PathColumn& col = b.cols[j];
  const int m = col.events();
  // Off-diagonal coordinates are non-decreasing from 0, so zero final value means
  // a zero path on the whole horizon.
  return col.drift[i] == 0.0 && col.cum[static_cast<size_t>(i) * (m + 1) + m] == 0.0;
}

}  // namespace

HittingResult smallest_solution(const PathBundle& b, const Vec& r, long long sweep_cap,
                                std::vector<Vec>* trace) {
  const int d = b.d;
  if (static_cast<int>(r.size()) != d) throw std::invalid_argument("smallest_solution: r has wrong length");
  for (double v : r)
    if (v < 0.0) throw std::invalid_argument("smallest_solution: r must be componentwise nonnegative");

  HittingResult res;
  res.s.assign(d, 0.0);
  res.status.assign(d, HitStatus::censored);
  res.matrix_at = Mat(d, d);

  const bool lattice = b.is_lattice();
  std::vector<long long> r_units, v_units, v_units_new;
  Vec v_real = r;
  std::vector<int> cursor(d, 0);
  if (lattice) {
    std::vector<Vec> dummy;
    r_units.resize(d);
    for (int i = 0; i < d; ++i) {
      double x = r[i] * b.k;
      r_units[i] = std::llround(x);
      if (std::fabs(x - r_units[i]) > 1e-6)
        throw std::invalid_argument("smallest_solution: r must lie on the 1/k grid for lattice paths");
    }
    v_units = r_units;
    v_units_new = r_units;
  }

  Vec s(d), s_new(d);
  for (int i = 0; i < d; ++i)
    s[i] = lattice ? lattice_first_passage(b, i, v_units[i], cursor[i]) : continuous_first_passage(b, i, v_real[i]);
  res.iterations = 1;
  if (trace) trace->push_back(s);

  auto offdiag_read = [&](int i, int j, double sj) -> double {
    double t = std::isinf(sj) ? b.horizon : sj;
    return lattice ? b.value(i, j, t) : (std::isinf(sj) ? b.value(i, j, t) : b.left(i, j, t));
  };

  while (true) {
    if (res.iterations >= sweep_cap)
      throw resource_error("smallest_solution: sweep cap exceeded");
    bool changed = false;
    if (lattice) {
      for (int i = 0; i < d; ++i) {
        long long acc = r_units[i];
        for (int j = 0; j < d; ++j) {
          if (j == i) continue;
          double t = std::isinf(s[j]) ? b.horizon : s[j];
          acc += b.unit_value(i, j, t);
        }
        v_units_new[i] = acc;
      }
      for (int i = 0; i < d; ++i) {
        if (v_units_new[i] == v_units[i]) {
          s_new[i] = s[i];
          continue;
        }
        v_units[i] = v_units_new[i];
        s_new[i] = lattice_first_passage(b, i, v_units[i], cursor[i]);
        if (s_new[i] != s[i]) changed = true;
      }
    } else {
      for (int i = 0; i < d; ++i) {
        double acc = r[i];
        for (int j = 0; j < d; ++j)
          if (j != i) acc += offdiag_read(i, j, s[j]);
        v_real[i] = acc;
      }
      for (int i = 0; i < d; ++i) {
        s_new[i] = continuous_first_passage(b, i, v_real[i]);
        double a = s[i], c = s_new[i];
        bool same = (a == c) || (std::isinf(a) && std::isinf(c)) ||
                    (std::isfinite(a) && std::isfinite(c) && std::fabs(c - a) <= 1e-14 * std::max(1.0, std::fabs(c)));
        if (!same) changed = true;
      }
    }
    ++res.iterations;
    s = s_new;
    if (trace) trace->push_back(s);
    if (!changed) break;
  }

  res.s = s;
  for (int i = 0; i < d; ++i) {
    if (std::isinf(s[i])) {
      res.status[i] = HitStatus::censored;
      continue;
    }
    bool certain = true;
    for (int j = 0; j < d; ++j)
      if (j != i && std::isinf(s[j]) && !column_coord_identically_zero(b, i, j)) certain = false;
    res.status[i] = certain ? HitStatus::hit : HitStatus::censored;
  }
  res.all_hit = true;
  for (int i = 0; i < d; ++i)
    if (res.status[i] != HitStatus::hit) res.all_hit = false;

  if (lattice) res.matrix_units.assign(static_cast<size_t>(d) * d, 0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double t = std::isinf(s[j]) ? b.horizon : s[j];
      if (lattice) {
        long long u = b.unit_value(i, j, t);
        res.matrix_units[static_cast<size_t>(i) * d + j] = u;
        res.matrix_at(i, j) = static_cast<double>(u) / b.k;
      } else {
        res.matrix_at(i, j) = std::isinf(s[j]) ? b.value(i, j, t) : b.left(i, j, t);
      }
    }
  return res;
}

bool check_dominance(const PathBundle& b, const Vec& r, const Vec& u, const HittingResult& s) {
  const int d = b.d;
  if (static_cast<int>(u.size()) != d) throw std::invalid_argument("check_dominance: u has wrong length");
  bool premise = true;
  for (int i = 0; i < d && premise; ++i) {
    if (std::isinf(u[i])) continue;
    double acc = r[i];
    for (int j = 0; j < d; ++j) {
      double t = std::isinf(u[j]) ? b.horizon : u[j];
      acc += b.is_lattice() ? b.value(i, j, t) : (std::isinf(u[j]) ? b.value(i, j, t) : b.left(i, j, t));
    }
    if (acc > (b.is_lattice() ? 1e-12 : 1e-9 * (1.0 + std::fabs(r[i])))) premise = false;
  }
  if (!premise) return true;
  for (int i = 0; i < d; ++i) {
    double si = s.s[i];
    if (std::isinf(u[i]) || std::isinf(si)) continue;  // u_i = inf dominates; s_i = inf handled below
    if (u[i] < si - (b.is_lattice() ? 0.0 : 1e-12 * std::max(1.0, si))) return false;
  }
  for (int i = 0; i < d; ++i)
    if (std::isinf(s.s[i]) && !std::isinf(u[i])) return false;
  return true;
}

bool check_infimum_property(const PathBundle& b, const HittingResult& res) {
  const int d = b.d;
  for (int i = 0; i < d; ++i) {
    if (!res.hit(i)) continue;
    double si = res.s[i];
    const PathColumn& col = b.cols[i];
    const int m = col.events();
    const size_t base = static_cast<size_t>(i) * (m + 1);
    if (b.is_lattice()) {
      int upto = b.count_le(i, si);
      long long at = col.cum_units[base + upto];
      long long mn = 0;
      int first = 0;
      for (int e = 1; e <= upto; ++e)
        if (col.cum_units[base + e] < mn) { mn = col.cum_units[base + e]; first = e; }
      if (at != mn) return false;
      if (first != upto && !(upto == 0 && first == 0)) return false;
    } else {
      const double slope = col.drift[i];
      double at = b.left(i, i, si);
      // Running infimum of a piecewise-linear path is attained at segment ends.
      double inf = 0.0;
      double t_prev = 0.0, y = 0.0;
      int e = 0;
      for (; e <= m; ++e) {
        double t_next = (e < m) ? std::min(col.times[e], si) : si;
        if (t_next > si) t_next = si;
        double y_end = y + slope * (t_next - t_prev);
        inf = std::min(inf, std::min(y, y_end));
        if (t_next >= si) break;
        y = y_end + (col.cum[base + e + 1] - col.cum[base + e]);
        t_prev = col.times[e];
      }
      double tol = 1e-9 * (1.0 + std::fabs(inf));
      if (std::fabs(at - inf) > tol) return false;
      // First attainment time of the infimum must be s_i itself.
      t_prev = 0.0;
      y = 0.0;
      double first_t = kInfTime;
      for (e = 0; e <= m && std::isinf(first_t); ++e) {
        double t_next = (e < m) ? std::min(col.times[e], si) : si;
        double y_end = y + slope * (t_next - t_prev);
        if (std::fabs(y - inf) <= tol) first_t = t_prev;
        else if (slope < 0.0 && y > inf && y_end <= inf + tol) first_t = t_prev + (inf - y) / slope;
        if (t_next >= si) break;
        y = y_end + (col.cum[base + e + 1] - col.cum[base + e]);
        t_prev = col.times[e];
      }
      if (std::isinf(first_t) || std::fabs(first_t - si) > 1e-9 * (1.0 + si)) return false;
    }
  }
  return true;
}

}  // namespace spalf
