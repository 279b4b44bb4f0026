#include "dsm/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsm/errors.hpp"

namespace dsm {

Field::Field(int n, double length, double u0, double v0)
    : l(length),
      u(static_cast<std::size_t>(n + 1), u0),
      v(static_cast<std::size_t>(n + 1), v0) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "a field needs at least 3 nodes");
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidArgument, "domain length must be positive");
}

bool Field::all_finite() const noexcept {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(u.begin(), u.end(), finite) && std::all_of(v.begin(), v.end(), finite);
}

bool Field::all_positive() const noexcept {
  auto positive = [](double x) { return x > 0.0; };
  return std::all_of(u.begin(), u.end(), positive) && std::all_of(v.begin(), v.end(), positive);
}

std::vector<double> Field::grid() const {
  std::vector<double> xs(u.size());
  for (int i = 0; i <= n(); ++i) xs[static_cast<std::size_t>(i)] = x(i);
  return xs;
}

double max_distance(const Field& a, const Field& b) {
  if (a.u.size() != b.u.size()) {
    throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    d = std::max({d, std::abs(a.u[i] - b.u[i]), std::abs(a.v[i] - b.v[i])});
  }
  return d;
}

double grid_cosine(long m, long i, long n) {
  // cos(pi q / n) with q = m i reduced modulo 2n, then folded into [0, n/2].
  const long period = 2 * n;
  long q = (m * i) % period;
  if (q < 0) q += period;
  if (q > n) q = period - q;  // cos is even about pi
  double sign = 1.0;
  if (2 * q > n) {  // cos(pi - t) = -cos(t)
    q = n - q;
    sign = -1.0;
  }
  if (2 * q == n) return 0.0;
  return sign * std::cos(std::numbers::pi * static_cast<double>(q) / static_cast<double>(n));
}

std::vector<double> grid_cosine_table(long m, long n) {
  std::vector<double> c(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) c[static_cast<std::size_t>(i)] = grid_cosine(m, i, n);
  return c;
}

double trapezoid_mean(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 2) return count == 1 ? values[0] : 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < count; ++i) sum += values[i];
  return sum / static_cast<double>(count - 1);
}

}  // namespace dsm
