#include "spalf/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spalf {

namespace {

void check_times(const std::vector<double>& times, double horizon) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t > 0.0) || t > horizon) throw std::invalid_argument("PathBundle: event epochs must lie in (0, H]");
    if (t <= prev) throw std::invalid_argument("PathBundle: event epochs must be strictly increasing");
    prev = t;
  }
}

}  // namespace

PathBundle PathBundle::continuous(int d, double horizon, const std::vector<Vec>& drifts,
                                  const std::vector<std::vector<std::pair<double, Vec>>>& events) {
  if (d <= 0 || !(horizon > 0.0)) throw std::invalid_argument("PathBundle: bad dimension or horizon");
  if (static_cast<int>(drifts.size()) != d || static_cast<int>(events.size()) != d)
    throw std::invalid_argument("PathBundle: need one drift vector and event list per column");
  PathBundle b;
  b.d = d;
  b.horizon = horizon;
  b.k = 0;
  b.cols.resize(d);
  for (int j = 0; j < d; ++j) {
    PathColumn& col = b.cols[j];
    col.drift = drifts[j];
    if (static_cast<int>(col.drift.size()) != d) throw std::invalid_argument("PathBundle: drift vector length mismatch");
    for (int i = 0; i < d; ++i)
      if (i != j && col.drift[i] < 0.0)
        throw std::invalid_argument("PathBundle: off-diagonal drift must be >= 0");
    const int m = static_cast<int>(events[j].size());
    col.times.reserve(m);
    col.cum.assign(static_cast<size_t>(d) * (m + 1), 0.0);
    for (int s = 0; s < m; ++s) {
      const auto& [t, delta] = events[j][s];
      col.times.push_back(t);
      if (static_cast<int>(delta.size()) != d) throw std::invalid_argument("PathBundle: event delta length mismatch");
      for (int i = 0; i < d; ++i) {
        if (delta[i] < 0.0)
          throw std::invalid_argument("PathBundle: continuous-family event deltas must be >= 0");
        col.cum[static_cast<size_t>(i) * (m + 1) + s + 1] = col.cum[static_cast<size_t>(i) * (m + 1) + s] + delta[i];
      }
    }
    check_times(col.times, horizon);
  }
  return b;
}

PathBundle PathBundle::lattice(int d, double horizon, int k,
                               const std::vector<std::vector<std::pair<double, std::vector<long long>>>>& events) {
  if (d <= 0 || !(horizon > 0.0) || k <= 0) throw std::invalid_argument("PathBundle: bad dimension, horizon, or k");
  if (static_cast<int>(events.size()) != d) throw std::invalid_argument("PathBundle: need one event list per column");
  PathBundle b;
  b.d = d;
  b.horizon = horizon;
  b.k = k;
  b.cols.resize(d);
  for (int j = 0; j < d; ++j) {
    PathColumn& col = b.cols[j];
    col.drift.assign(d, 0.0);
    const int m = static_cast<int>(events[j].size());
    col.times.reserve(m);
    col.cum.assign(static_cast<size_t>(d) * (m + 1), 0.0);
    col.cum_units.assign(static_cast<size_t>(d) * (m + 1), 0);
    for (int s = 0; s < m; ++s) {
      const auto& [t, units] = events[j][s];
      col.times.push_back(t);
      if (static_cast<int>(units.size()) != d) throw std::invalid_argument("PathBundle: event units length mismatch");
      for (int i = 0; i < d; ++i) {
        if (i == j && units[i] < -1)
          throw std::invalid_argument("PathBundle: lattice diagonal steps must be >= -1/k");
        if (i != j && units[i] < 0)
          throw std::invalid_argument("PathBundle: lattice off-diagonal steps must be >= 0");
        size_t idx = static_cast<size_t>(i) * (m + 1) + s;
        col.cum_units[idx + 1] = col.cum_units[idx] + units[i];
        col.cum[idx + 1] = static_cast<double>(col.cum_units[idx + 1]) / k;
      }
    }
    check_times(col.times, horizon);
  }
  return b;
}

int PathBundle::count_le(int j, double t) const {
  const auto& v = cols[j].times;
  return static_cast<int>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
}

int PathBundle::count_lt(int j, double t) const {
  const auto& v = cols[j].times;
  return static_cast<int>(std::lower_bound(v.begin(), v.end(), t) - v.begin());
}

double PathBundle::value(int i, int j, double t) const {
  return cols[j].drift[i] * t + cum_at(i, j, count_le(j, t));
}

double PathBundle::left(int i, int j, double t) const {
  return cols[j].drift[i] * t + cum_at(i, j, count_lt(j, t));
}

long long PathBundle::unit_value(int i, int j, double t) const {
  return cum_units_at(i, j, count_le(j, t));
}

long long PathBundle::unit_left(int i, int j, double t) const {
  return cum_units_at(i, j, count_lt(j, t));
}

}  // namespace spalf
