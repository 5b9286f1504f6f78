#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace calwav {

using Vec = std::vector<double>;

/// Small dense row-major matrix. Dimensions here are tiny (d <= 4), so no
/// expression templates or BLAS.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  static Mat identity(int n);
  static Mat diag(std::span<const double> entries);

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  Mat transpose() const;
  double det() const;
  Mat inverse() const;  // throws on singular input
  Vec apply(std::span<const double> x) const;
};

Mat operator*(const Mat& x, const Mat& y);

double norm(std::span<const double> x);
double distance(std::span<const double> x, std::span<const double> y);
double max_abs_diff(const Mat& x, const Mat& y);

}  // namespace calwav
