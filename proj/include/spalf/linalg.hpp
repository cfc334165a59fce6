#ifndef SPALF_LINALG_HPP
#define SPALF_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace spalf {

using Vec = std::vector<double>;

// Small dense row-major matrix; the dimensions in this project stay tiny (d <= 3).
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}
  Mat(std::initializer_list<std::initializer_list<double>> init) {
    rows = static_cast<int>(init.size());
    cols = rows ? static_cast<int>(init.begin()->size()) : 0;
    a.reserve(static_cast<size_t>(rows) * cols);
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols) throw std::invalid_argument("Mat: ragged initializer");
      for (double v : row) a.push_back(v);
    }
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Vec column(int j) const {
    Vec c(rows);
    for (int i = 0; i < rows; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Mat transpose() const {
    Mat t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double max_abs(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

// Columnwise inner-product pairing of two matrices; equals the entrywise sum.
inline double special_product(const Mat& A, const Mat& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("special_product: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < A.a.size(); ++i) s += A.a[i] * B.a[i];
  return s;
}

// Solves M x = b by partial-pivot Gaussian elimination (M copied).
inline Vec solve_linear(Mat M, Vec b) {
  const int n = M.rows;
  if (M.cols != n || static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_linear: shape");
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(M(r, c)) > std::fabs(M(p, c))) p = r;
    if (std::fabs(M(p, c)) < 1e-300) throw std::runtime_error("solve_linear: singular matrix");
    if (p != c) {
      for (int j = c; j < n; ++j) std::swap(M(c, j), M(p, j));
      std::swap(b[c], b[p]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = M(r, c) / M(c, c);
      if (f == 0.0) continue;
      for (int j = c; j < n; ++j) M(r, j) -= f * M(c, j);
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= M(r, j) * x[j];
    x[r] = s / M(r, r);
  }
  return x;
}

inline double det(Mat M) {
  const int n = M.rows;
  if (M.cols != n) throw std::invalid_argument("det: not square");
  double d = 1.0;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(M(r, c)) > std::fabs(M(p, c))) p = r;
    if (M(p, c) == 0.0) return 0.0;
    if (p != c) {
      for (int j = c; j < n; ++j) std::swap(M(c, j), M(p, j));
      d = -d;
    }
    d *= M(c, c);
    for (int r = c + 1; r < n; ++r) {
      double f = M(r, c) / M(c, c);
      for (int j = c; j < n; ++j) M(r, j) -= f * M(c, j);
    }
  }
  return d;
}

}  // namespace spalf

#endif
