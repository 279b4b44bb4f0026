#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsm {

/// Bacterial density u and AHL concentration v on the uniform grid
/// x_i = i l / n, i = 0..n.
struct Field {
  double l = 20.0;
  std::vector<double> u;
  std::vector<double> v;

  Field() = default;
  Field(int n, double l, double u0 = 1.0, double v0 = 1.0);

  int n() const noexcept { return static_cast<int>(u.size()) - 1; }
  double h() const noexcept { return l / static_cast<double>(n()); }
  double x(int i) const noexcept { return h() * static_cast<double>(i); }

  bool all_finite() const noexcept;
  bool all_positive() const noexcept;
  std::vector<double> grid() const;
};

/// Max-norm distance over both components. Fields must share a grid.
double max_distance(const Field& a, const Field& b);

/// cos(pi m i / n) with the argument reduced to [0, pi/2]: the returned values
/// satisfy the grid reflection identity c(m, n - i) = (-1)^m c(m, i) exactly.
double grid_cosine(long m, long i, long n);

/// Cosine table c[i] = cos(pi m i / n), i = 0..n, exact under reflection.
std::vector<double> grid_cosine_table(long m, long n);

/// Trapezoid-rule mean of samples on a uniform grid (half weight at the ends).
double trapezoid_mean(std::span<const double> values);

}  // namespace dsm
