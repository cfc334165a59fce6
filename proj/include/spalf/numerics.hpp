#ifndef SPALF_NUMERICS_HPP
#define SPALF_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "spalf/errors.hpp"
#include "spalf/linalg.hpp"

namespace spalf {

inline double normal_pdf(double x, double mean, double var) {
  double z = x - mean;
  return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

// Adaptive Simpson with absolute tolerance.
namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                          double fb, double whole, double tol, int depth, int force) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) throw numeric_error("adaptive_simpson: recursion budget exceeded");
  if (force <= 0 && std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, force - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, force - 1);
}
}  // namespace detail

// `min_depth` bisections are unconditional, so narrow features inside a wide
// interval cannot slip through the first coarse error estimates.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 48, int min_depth = 6) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, min_depth);
}

// Neville polynomial extrapolation to h = 0 of values v_i at nodes h_i.
inline double neville_at_zero(const std::vector<double>& h, std::vector<double> v) {
  const int n = static_cast<int>(h.size());
  for (int level = 1; level < n; ++level)
    for (int i = 0; i < n - level; ++i)
      v[i] = (h[i + level] * v[i] - h[i] * v[i + 1]) / (h[i + level] - h[i]);
  return v[0];
}

// Last-step extrapolation change: | diagonal(n) - diagonal(n-1) | as a convergence gauge.
inline std::pair<double, double> neville_with_gap(const std::vector<double>& h, std::vector<double> v) {
  const int n = static_cast<int>(h.size());
  double prev = v[0];
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i < n - level; ++i)
      v[i] = (h[i + level] * v[i] - h[i] * v[i + 1]) / (h[i + level] - h[i]);
    if (level == n - 2) prev = v[0];
  }
  return {v[0], std::fabs(v[0] - prev)};
}

// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_q(double x) {
  if (x < 1e-3) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * std::exp(-2.0 * j * j * x * x);
    s += (j % 2 ? term : -term);
    if (term < 1e-14) break;
  }
  return std::min(1.0, std::max(0.0, s));
}

// Two-sample Kolmogorov-Smirnov: returns {D, p}. Samples are sorted in place.
inline std::pair<double, double> ks_two_sample(std::vector<double>& x, std::vector<double>& y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const size_t n = x.size(), m = y.size();
  if (n == 0 || m == 0) throw std::invalid_argument("ks_two_sample: empty sample");
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    double v = std::min(x[i], y[j]);
    while (i < n && x[i] <= v) ++i;
    while (j < m && y[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  double ne = std::sqrt(static_cast<double>(n) * m / (n + m));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

// Chunked reduction: indices are split into fixed-size chunks accumulated
// serially, and chunk results are merged in index order. The reduced value is
// therefore bit-identical for every worker count, including serial runs.
template <typename Acc, typename Body, typename Merge>
Acc parallel_reduce(long long n, int workers, Acc init, Body body, Merge merge) {
  constexpr long long kChunk = 8192;
  workers = std::max(1, workers);
  const long long nchunks = (n + kChunk - 1) / kChunk;
  std::vector<Acc> parts(static_cast<size_t>(std::max<long long>(nchunks, 1)), init);
  auto run_chunk = [&](long long c) {
    long long lo = c * kChunk, hi = std::min(n, lo + kChunk);
    for (long long i = lo; i < hi; ++i) body(parts[static_cast<size_t>(c)], i);
  };
  if (workers == 1 || nchunks <= 1) {
    for (long long c = 0; c < nchunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (long long c = w; c < nchunks; c += workers) run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }
  Acc acc = init;
  for (long long c = 0; c < nchunks; ++c) acc = merge(acc, parts[static_cast<size_t>(c)]);
  return acc;
}

}  // namespace spalf

#endif
