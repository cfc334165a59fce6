#include "spalf/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spalf {

namespace {

constexpr double kMaxLatticeRate = 1e9;
constexpr double kGridTol = 1e-9;

void check_dims(const ModelSpec& m) {
  if (m.d <= 0) throw std::invalid_argument("ModelSpec: dimension must be positive");
  if (m.drift.rows != m.d || m.drift.cols != m.d) throw std::invalid_argument("ModelSpec: drift must be d x d");
  if (static_cast<int>(m.diffusion.size()) != m.d) throw std::invalid_argument("ModelSpec: diffusion must have length d");
  if (static_cast<int>(m.jumps.size()) != m.d) throw std::invalid_argument("ModelSpec: jumps must have one entry per column");
  for (const auto& col : m.jumps)
    for (const auto& c : col) {
      if (static_cast<int>(c.delta.size()) != m.d) throw std::invalid_argument("ModelSpec: jump vector length mismatch");
      if (!(c.rate > 0.0)) throw std::invalid_argument("ModelSpec: jump rates must be positive");
    }
}

}  // namespace

ModelSpec ModelSpec::continuous(Mat drift, Vec diffusion, std::vector<std::vector<JumpComponent>> jumps) {
  ModelSpec m;
  m.d = drift.rows;
  m.drift = std::move(drift);
  m.diffusion = std::move(diffusion);
  m.jumps = std::move(jumps);
  m.lattice_k = 0;
  check_dims(m);
  for (int j = 0; j < m.d; ++j) {
    if (m.diffusion[j] < 0.0) throw std::invalid_argument("ModelSpec: diffusion coefficients must be >= 0");
    for (int i = 0; i < m.d; ++i)
      if (i != j && m.drift(i, j) < 0.0)
        throw std::invalid_argument("ModelSpec: off-diagonal drift must be >= 0 (non-decreasing coordinates)");
    for (const auto& c : m.jumps[j]) {
      for (int i = 0; i < m.d; ++i)
        if (c.delta[i] < 0.0) throw std::invalid_argument("ModelSpec: continuous-family jumps must be >= 0 (no negative jumps)");
      if (!c.units.empty()) throw std::invalid_argument("ModelSpec: units are reserved for the lattice family");
    }
  }
  return m;
}

ModelSpec ModelSpec::lattice(int k, const Mat& drift, std::vector<std::vector<JumpComponent>> jumps) {
  if (k <= 0) throw std::invalid_argument("ModelSpec: lattice resolution must be positive");
  ModelSpec m;
  m.d = drift.rows;
  m.drift = Mat(m.d, m.d, 0.0);
  m.diffusion = Vec(m.d, 0.0);
  m.jumps = std::move(jumps);
  m.lattice_k = k;
  check_dims(m);

  for (int j = 0; j < m.d; ++j) {
    for (auto& c : m.jumps[j]) {
      if (c.units.empty()) {
        c.units.resize(m.d);
        for (int i = 0; i < m.d; ++i) {
          double u = c.delta[i] * k;
          long long ui = std::llround(u);
          if (std::fabs(u - ui) > kGridTol)
            throw std::invalid_argument("ModelSpec: lattice jump coordinate off the 1/k grid");
          c.units[i] = ui;
        }
      }
      if (static_cast<int>(c.units.size()) != m.d) throw std::invalid_argument("ModelSpec: jump units length mismatch");
      for (int i = 0; i < m.d; ++i) {
        c.delta[i] = static_cast<double>(c.units[i]) / k;
        if (i == j && c.units[i] < -1)
          throw std::invalid_argument("ModelSpec: lattice diagonal jumps must be >= -1/k (downward skip free)");
        if (i != j && c.units[i] < 0)
          throw std::invalid_argument("ModelSpec: lattice off-diagonal jumps must be >= 0");
      }
    }
    // Drift enters the lattice dynamics as Poisson streams of single +-1/k steps.
    for (int i = 0; i < m.d; ++i) {
      double a = drift(i, j);
      if (a == 0.0) continue;
      if (i != j && a < 0.0) throw std::invalid_argument("ModelSpec: off-diagonal drift must be >= 0");
      double rate = k * std::fabs(a);
      if (rate > kMaxLatticeRate)
        throw std::invalid_argument("ModelSpec: drift " + std::to_string(a) + " needs a Poisson rate above 1e9 at k=" + std::to_string(k));
      JumpComponent c;
      c.rate = rate;
      c.delta = Vec(m.d, 0.0);
      c.units = std::vector<long long>(m.d, 0);
      c.units[i] = a > 0.0 ? 1 : -1;
      c.delta[i] = static_cast<double>(c.units[i]) / k;
      m.jumps[j].push_back(std::move(c));
    }
  }
  return m;
}

std::vector<long long> ModelSpec::grid_units(const Vec& r) const {
  if (!is_lattice()) throw std::invalid_argument("grid_units: continuous-family model");
  if (static_cast<int>(r.size()) != d) throw std::invalid_argument("grid_units: dimension mismatch");
  std::vector<long long> u(d);
  for (int i = 0; i < d; ++i) {
    double x = r[i] * lattice_k;
    u[i] = std::llround(x);
    if (std::fabs(x - u[i]) > 1e-6) throw std::invalid_argument("grid_units: level off the 1/k grid");
  }
  return u;
}

ExponentOracle::ExponentOracle(ModelSpec model)
    : d_(model.d), model_(std::make_shared<ModelSpec>(std::move(model))), shift_(d_, d_, 0.0), shift_offset_(d_, 0.0) {}

ExponentOracle::ExponentOracle(int dim, ClosedForm phi, std::function<Mat(const Vec&)> jacobian)
    : d_(dim), closed_form_(std::move(phi)), closed_jacobian_(std::move(jacobian)),
      shift_(dim, dim, 0.0), shift_offset_(dim, 0.0) {
  if (d_ <= 0) throw std::invalid_argument("ExponentOracle: dimension must be positive");
  if (!closed_form_) throw std::invalid_argument("ExponentOracle: closed form required");
}

const ModelSpec& ExponentOracle::model() const {
  if (!model_) throw std::invalid_argument("ExponentOracle: closed-form oracle has no parametric model");
  return *model_;
}

Vec ExponentOracle::eval_base(const Vec& lambda) const {
  if (closed_form_) return closed_form_(lambda);
  const ModelSpec& m = *model_;
  Vec phi(d_, 0.0);
  for (int j = 0; j < d_; ++j) {
    double v = 0.0;
    for (int i = 0; i < d_; ++i) v -= m.drift(i, j) * lambda[i];
    v += 0.5 * m.diffusion[j] * lambda[j] * lambda[j];
    for (const auto& c : m.jumps[j]) {
      double e = 0.0;
      for (int i = 0; i < d_; ++i) e += lambda[i] * c.delta[i];
      v -= c.rate * (1.0 - std::exp(-e));
    }
    phi[j] = v;
  }
  return phi;
}

Mat ExponentOracle::jacobian_base(const Vec& lambda) const {
  if (closed_form_) {
    if (closed_jacobian_) return closed_jacobian_(lambda);
    // Central differences as a fallback for the closed-form escape hatch.
    Mat J(d_, d_);
    for (int i = 0; i < d_; ++i) {
      double h = 1e-6 * (1.0 + std::fabs(lambda[i]));
      Vec lp = lambda, lm = lambda;
      lp[i] += h;
      lm[i] = std::max(0.0, lm[i] - h);
      double denom = lp[i] - lm[i];
      Vec fp = closed_form_(lp), fm = closed_form_(lm);
      for (int j = 0; j < d_; ++j) J(i, j) = -(fp[j] - fm[j]) / denom;
    }
    return J;
  }
  const ModelSpec& m = *model_;
  Mat J(d_, d_);
  for (int j = 0; j < d_; ++j) {
    for (int i = 0; i < d_; ++i) J(i, j) = m.drift(i, j);
    J(j, j) -= m.diffusion[j] * lambda[j];
    for (const auto& c : m.jumps[j]) {
      double e = 0.0;
      for (int i = 0; i < d_; ++i) e += lambda[i] * c.delta[i];
      double w = c.rate * std::exp(-e);
      for (int i = 0; i < d_; ++i) J(i, j) += w * c.delta[i];
    }
  }
  return J;
}

Vec ExponentOracle::eval(const Vec& lambda) const {
  if (static_cast<int>(lambda.size()) != d_) throw std::invalid_argument("eval_phi: dimension mismatch");
  for (double v : lambda)
    if (v < 0.0) throw std::invalid_argument("eval_phi: lambda must be componentwise nonnegative");
  bool shifted = false;
  for (double v : shift_.a)
    if (v != 0.0) { shifted = true; break; }
  if (!shifted) return eval_base(lambda);
  Vec out(d_);
  for (int j = 0; j < d_; ++j) {
    Vec shifted_lambda(d_);
    for (int i = 0; i < d_; ++i) shifted_lambda[i] = lambda[i] + shift_(i, j);
    out[j] = eval_base(shifted_lambda)[j] - shift_offset_[j];
  }
  return out;
}

double ExponentOracle::eval_col(int j, const Vec& lambda) const { return eval(lambda)[j]; }

Mat ExponentOracle::jacobian(const Vec& lambda) const {
  if (static_cast<int>(lambda.size()) != d_) throw std::invalid_argument("jacobian_phi: dimension mismatch");
  bool shifted = false;
  for (double v : shift_.a)
    if (v != 0.0) { shifted = true; break; }
  if (!shifted) return jacobian_base(lambda);
  Mat J(d_, d_);
  for (int j = 0; j < d_; ++j) {
    Vec shifted_lambda(d_);
    for (int i = 0; i < d_; ++i) shifted_lambda[i] = lambda[i] + shift_(i, j);
    Mat Jj = jacobian_base(shifted_lambda);
    for (int i = 0; i < d_; ++i) J(i, j) = Jj(i, j);
  }
  return J;
}

ExponentOracle ExponentOracle::esscher(const Mat& mu) const {
  if (mu.rows != d_ || mu.cols != d_) throw std::invalid_argument("esscher_exponent: mu must be d x d");
  for (double v : mu.a)
    if (v < 0.0) throw std::invalid_argument("esscher_exponent: mu must be entrywise nonnegative");
  ExponentOracle out = *this;
  for (int j = 0; j < d_; ++j)
    for (int i = 0; i < d_; ++i) out.shift_(i, j) = shift_(i, j) + mu(i, j);
  for (int j = 0; j < d_; ++j) {
    Vec col(d_);
    for (int i = 0; i < d_; ++i) col[i] = out.shift_(i, j);
    out.shift_offset_[j] = eval_base(col)[j];
  }
  return out;
}

ModelSpec ExponentOracle::esscher_model(const Mat& mu) const {
  const ModelSpec& m = model();
  if (mu.rows != d_ || mu.cols != d_) throw std::invalid_argument("esscher_model: mu must be d x d");
  for (double v : mu.a)
    if (v < 0.0) throw std::invalid_argument("esscher_model: mu must be entrywise nonnegative");
  ModelSpec out = m;
  for (int j = 0; j < d_; ++j) {
    out.drift(j, j) -= m.diffusion[j] * mu(j, j);
    for (auto& c : out.jumps[j]) {
      double e = 0.0;
      for (int i = 0; i < d_; ++i) e += mu(i, j) * c.delta[i];
      c.rate *= std::exp(-e);
    }
  }
  return out;
}

double special_product_vec(const Mat& A, const Mat& B) { return special_product(A, B); }

}  // namespace spalf
