#ifndef SPALF_TEST_HELPERS_HPP
#define SPALF_TEST_HELPERS_HPP

#include <vector>

#include "spalf/model.hpp"

namespace spalf_test {

using spalf::JumpComponent;
using spalf::Mat;
using spalf::ModelSpec;
using spalf::Vec;

inline JumpComponent jump(double rate, Vec delta) {
  JumpComponent c;
  c.rate = rate;
  c.delta = std::move(delta);
  return c;
}

inline JumpComponent lattice_jump(double rate, std::vector<long long> units) {
  JumpComponent c;
  c.rate = rate;
  c.units = std::move(units);
  c.delta.assign(c.units.size(), 0.0);
  return c;
}

// d=1 compound-Poisson death process on the unit grid: X_t = -N_t.
inline ModelSpec d1_pure_death(double rate = 1.0, int k = 1) {
  return ModelSpec::lattice(k, Mat(1, 1, 0.0), {{lattice_jump(rate, {-1})}});
}

// d=1 continuous-time birth-death walk: +1 at rate p, -1 at rate 1-p.
inline ModelSpec d1_birth_death(double p_up, int k = 1) {
  return ModelSpec::lattice(k, Mat(1, 1, 0.0),
                            {{lattice_jump(p_up, {1}), lattice_jump(1.0 - p_up, {-1})}});
}

// d=1 drift -1 plus unit jumps at unit rate (zero-mean spectrally positive).
inline ModelSpec d1_drift_jump() {
  return ModelSpec::continuous(Mat(1, 1, -1.0), {0.0}, {{jump(1.0, {1.0})}});
}

// d=1 Brownian motion with drift a and variance q.
inline ModelSpec d1_brownian(double a, double q) {
  return ModelSpec::continuous(Mat(1, 1, a), {q}, {{}});
}

// Coupled 2-type lattice model: each type dies at unit rate, feeds the other
// type at rate `cross`, and branches (self +1) at rate `birth`.
inline ModelSpec d2_coupled(double cross, double birth, int k = 1) {
  std::vector<std::vector<JumpComponent>> cols(2);
  cols[0] = {lattice_jump(1.0, {-1, 0}), lattice_jump(cross, {0, 1})};
  cols[1] = {lattice_jump(1.0, {0, -1}), lattice_jump(cross, {1, 0})};
  if (birth > 0.0) {
    cols[0].push_back(lattice_jump(birth, {1, 0}));
    cols[1].push_back(lattice_jump(birth, {0, 1}));
  }
  return ModelSpec::lattice(k, Mat(2, 2, 0.0), cols);
}

}  // namespace spalf_test

#endif
