#ifndef SPALF_ESTIMATE_HPP
#define SPALF_ESTIMATE_HPP

#include <cmath>
#include <cstdint>

namespace spalf {

// Monoidal tally for mean/stderr reductions; merging is commutative and
// associative, so seed-partitioned parallel runs reduce to the serial result.
struct Accumulator {
  double sum = 0.0;
  double sumsq = 0.0;
  long long count = 0;
  long long censored = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  void add_censored() {
    ++count;
    ++censored;
  }
  Accumulator merged(const Accumulator& o) const {
    return {sum + o.sum, sumsq + o.sumsq, count + o.count, censored + o.censored};
  }
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long n = 0;
  std::uint64_t seed_base = 0;
  double censored_fraction = 0.0;

  static MCEstimate from(const Accumulator& a, std::uint64_t seed, double scale = 1.0) {
    MCEstimate e;
    e.n = a.count;
    e.seed_base = seed;
    if (a.count > 0) {
      double mean = a.sum / a.count;
      double var = a.count > 1 ? std::max(0.0, (a.sumsq - a.sum * mean) / (a.count - 1)) : 0.0;
      e.mean = scale * mean;
      e.stderr_ = scale * std::sqrt(var / a.count);
      e.censored_fraction = static_cast<double>(a.censored) / a.count;
    }
    return e;
  }
};

}  // namespace spalf

#endif
