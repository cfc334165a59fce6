#include "spalf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spalf {

ModelSampler::ModelSampler(const ModelSpec& model) : d_(model.d), k_(model.lattice_k) {
  if (!model.is_lattice()) throw std::invalid_argument("ModelSampler: exact simulation needs a lattice-family model");
  cols_.resize(d_);
  for (int j = 0; j < d_; ++j) {
    Column& c = cols_[j];
    double total = 0.0;
    for (const auto& comp : model.jumps[j]) total += comp.rate;
    c.total_rate = total;
    double acc = 0.0;
    for (const auto& comp : model.jumps[j]) {
      acc += comp.rate;
      c.cum_prob.push_back(total > 0.0 ? acc / total : 1.0);
      for (int i = 0; i < d_; ++i) c.units.push_back(comp.units[i]);
    }
    if (!c.cum_prob.empty()) c.cum_prob.back() = 1.0;
  }
}

int ModelSampler::pick_component(const Column& c, double u) const {
  return static_cast<int>(std::upper_bound(c.cum_prob.begin(), c.cum_prob.end(), u) - c.cum_prob.begin());
}

void ModelSampler::sample_path(std::mt19937_64& rng, double horizon, PathBundle& out) const {
  out.d = d_;
  out.k = k_;
  out.horizon = horizon;
  out.cols.resize(d_);
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < d_; ++j) {
    const Column& sc = cols_[j];
    PathColumn& col = out.cols[j];
    col.drift.assign(d_, 0.0);
    col.times.clear();
    if (sc.total_rate > 0.0) {
      double t = 0.0;
      while (true) {
        t += exp1(rng) / sc.total_rate;
        if (t > horizon) break;
        col.times.push_back(t);
      }
    }
    const int m = col.events();
    col.cum.assign(static_cast<size_t>(d_) * (m + 1), 0.0);
    col.cum_units.assign(static_cast<size_t>(d_) * (m + 1), 0);
    for (int e = 0; e < m; ++e) {
      int comp = sc.cum_prob.empty() ? 0 : pick_component(sc, unif(rng));
      const long long* u = &sc.units[static_cast<size_t>(comp) * d_];
      for (int i = 0; i < d_; ++i) {
        size_t idx = static_cast<size_t>(i) * (m + 1) + e;
        col.cum_units[idx + 1] = col.cum_units[idx] + u[i];
        col.cum[idx + 1] = static_cast<double>(col.cum_units[idx + 1]) / k_;
      }
    }
  }
}

void ModelSampler::extend_path(std::mt19937_64& rng, double horizon, PathBundle& bundle) const {
  if (horizon <= bundle.horizon) return;
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < d_; ++j) {
    const Column& sc = cols_[j];
    PathColumn& col = bundle.cols[j];
    std::vector<double> new_times;
    if (sc.total_rate > 0.0) {
      double t = bundle.horizon;
      while (true) {
        t += exp1(rng) / sc.total_rate;
        if (t > horizon) break;
        new_times.push_back(t);
      }
    }
    const int m_old = col.events();
    const int m = m_old + static_cast<int>(new_times.size());
    std::vector<double> cum(static_cast<size_t>(d_) * (m + 1));
    std::vector<long long> cum_units(static_cast<size_t>(d_) * (m + 1));
    for (int i = 0; i < d_; ++i)
      for (int e = 0; e <= m_old; ++e) {
        cum[static_cast<size_t>(i) * (m + 1) + e] = col.cum[static_cast<size_t>(i) * (m_old + 1) + e];
        cum_units[static_cast<size_t>(i) * (m + 1) + e] = col.cum_units[static_cast<size_t>(i) * (m_old + 1) + e];
      }
    col.times.insert(col.times.end(), new_times.begin(), new_times.end());
    col.cum = std::move(cum);
    col.cum_units = std::move(cum_units);
    for (int e = m_old; e < m; ++e) {
      int comp = sc.cum_prob.empty() ? 0 : pick_component(sc, unif(rng));
      const long long* u = &sc.units[static_cast<size_t>(comp) * d_];
      for (int i = 0; i < d_; ++i) {
        size_t idx = static_cast<size_t>(i) * (m + 1) + e;
        col.cum_units[idx + 1] = col.cum_units[idx] + u[i];
        col.cum[idx + 1] = static_cast<double>(col.cum_units[idx + 1]) / k_;
      }
    }
  }
  bundle.horizon = horizon;
}

void ModelSampler::sample_matrix_at(std::mt19937_64& rng, const Vec& t, std::vector<long long>& units_out) const {
  units_out.assign(static_cast<size_t>(d_) * d_, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 0; j < d_; ++j) {
    const Column& sc = cols_[j];
    if (sc.total_rate <= 0.0) continue;
    std::poisson_distribution<long long> pois(sc.total_rate * t[j]);
    long long n = pois(rng);
    for (long long e = 0; e < n; ++e) {
      int comp = pick_component(sc, unif(rng));
      const long long* u = &sc.units[static_cast<size_t>(comp) * d_];
      for (int i = 0; i < d_; ++i) units_out[static_cast<size_t>(i) * d_ + j] += u[i];
    }
  }
}

}  // namespace spalf
