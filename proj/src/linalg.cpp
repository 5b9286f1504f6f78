#include "calwav/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace calwav {

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::span<const double> entries) {
  const int n = static_cast<int>(entries.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = entries[i];
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Mat::det() const {
  if (rows != cols) throw std::invalid_argument("det of non-square matrix");
  if (rows == 1) return a[0];
  if (rows == 2) return a[0] * a[3] - a[1] * a[2];
  // Gaussian elimination with partial pivoting.
  Mat m = *this;
  double d = 1.0;
  for (int k = 0; k < rows; ++k) {
    int piv = k;
    for (int r = k + 1; r < rows; ++r)
      if (std::abs(m(r, k)) > std::abs(m(piv, k))) piv = r;
    if (m(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (int c = 0; c < cols; ++c) std::swap(m(k, c), m(piv, c));
      d = -d;
    }
    d *= m(k, k);
    for (int r = k + 1; r < rows; ++r) {
      const double f = m(r, k) / m(k, k);
      for (int c = k; c < cols; ++c) m(r, c) -= f * m(k, c);
    }
  }
  return d;
}

Mat Mat::inverse() const {
  if (rows != cols) throw std::invalid_argument("inverse of non-square matrix");
  const int n = rows;
  Mat m = *this;
  Mat inv = identity(n);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(piv, k))) piv = r;
    if (std::abs(m(piv, k)) < 1e-300) throw std::domain_error("singular matrix");
    if (piv != k) {
      for (int c = 0; c < n; ++c) {
        std::swap(m(k, c), m(piv, c));
        std::swap(inv(k, c), inv(piv, c));
      }
    }
    const double p = m(k, k);
    for (int c = 0; c < n; ++c) {
      m(k, c) /= p;
      inv(k, c) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = m(r, k);
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        m(r, c) -= f * m(k, c);
        inv(r, c) -= f * inv(k, c);
      }
    }
  }
  return inv;
}

Vec Mat::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("dimension mismatch in Mat::apply");
  Vec y(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += (*this)(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("dimension mismatch in matrix product");
  Mat z(x.rows, y.cols);
  for (int r = 0; r < x.rows; ++r)
    for (int k = 0; k < x.cols; ++k) {
      const double v = x(r, k);
      for (int c = 0; c < y.cols; ++c) z(r, c) += v * y(k, c);
    }
  return z;
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

double max_abs_diff(const Mat& x, const Mat& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

}  // namespace calwav
