#pragma once

// Test-side reference computations. Nothing here calls into the closed forms
// of the library; inputs are plain numbers (Taylor data of r, D, l, j).

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dsm::oracle {

struct Taylor {
  double r0, r1, r2, r3;
};

// Logistic r(v) = 1/(1+exp(k(v-1))) at v = 1, by hand:
// r = 1/2, r' = -k/4, r'' = 0, r''' = k^3/8.
inline Taylor logistic_taylor(double k) { return {0.5, -0.25 * k, 0.0, k * k * k / 8.0}; }

// r0 exp(-b v) at v = 1.
inline Taylor exponential_taylor(double r0, double b) {
  const double e = r0 * std::exp(-b);
  return {e, -b * e, b * b * e, -b * b * b * e};
}

// Central differences with two Richardson levels; good to ~1e-7 for smooth r.
inline double fd_derivative(const std::function<double(double)>& f, double x, int order) {
  auto central = [&](double h) {
    switch (order) {
      case 1: return (f(x + h) - f(x - h)) / (2 * h);
      case 2: return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
      default:
        return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
    }
  };
  const double h = order == 3 ? 2e-2 : 1e-3;
  const double a = central(h), b = central(h / 2), c = central(h / 4);
  const double ab = (4 * b - a) / 3, bc = (4 * c - b) / 3;
  return (16 * bc - ab) / 15;
}

inline double lambda(int j, double l) {
  const double q = std::numbers::pi * j / l;
  return q * q;
}

// Linearization of the colony model at (1,1) on the mode with eigenvalue lam:
// d/dt (phi, psi) = M (phi, psi).
inline std::array<double, 4> linear_matrix(double lam, double sigma, double D, const Taylor& t) {
  return {-t.r0 * lam - sigma, -t.r1 * lam, 1.0, -D * lam - 1.0};
}

inline std::array<std::complex<double>, 2> eigenvalues(const std::array<double, 4>& m) {
  const double tr = m[0] + m[3];
  const double det = m[0] * m[3] - m[1] * m[2];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4 - det));
  std::complex<double> a = tr / 2 + disc, b = tr / 2 - disc;
  if (a.real() < b.real()) std::swap(a, b);
  return {a, b};
}

// sigma at which det M vanishes, by bisection on [lo, hi].
inline double zero_det_sigma(double lam, double D, const Taylor& t, double lo = -50,
                             double hi = 50) {
  auto det = [&](double s) {
    const auto m = linear_matrix(lam, s, D, t);
    return m[0] * m[3] - m[1] * m[2];
  };
  double flo = det(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = det(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Gaussian elimination with partial pivoting on a dense row-major matrix.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    if (a[p * n + k] == 0.0) throw std::runtime_error("singular");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * x[j];
    x[k] = s / a[k * n + k];
  }
  return x;
}

// Weakly nonlinear coefficients recovered from the PDE residual itself.
//
// With r replaced by its cubic Taylor polynomial the residual of
//   u = 1 + e a C + e^2 (d1 + d2 C2),  v = 1 + e C + e^2 (d3 + d4 C2),
//   sigma = sigma0 + e^2 sigma2
// is a polynomial in e of degree <= 8 at each x. Its e^k coefficients come out
// exactly from 16 samples on the unit circle. d's make the e^2 part vanish;
// sigma2 is set by orthogonality of the e^3 part to the left null vector of
// the linearization on the mode.
struct WeaklyNonlinear {
  double lambda, sigma0, a;
  double d1, d2, d3, d4;
  double sigma2;
};

class ResidualSeries {
 public:
  ResidualSeries(int j, double D, double l, const Taylor& t, int nx = 1024)
      : D_(D), l_(l), t_(t), nx_(nx) {
    lam_ = lambda(j, l);
    k_ = std::sqrt(lam_);
    a_ = 1.0 + D * lam_;
    sigma0_ = zero_det_sigma(lam_, D, t);
  }

  double lam() const { return lam_; }
  double sigma0() const { return sigma0_; }
  double a() const { return a_; }

  // Mode projections (m-th cosine of base wavenumber k) of the e^order
  // coefficient of the (u, v) residuals.
  std::array<double, 2> projection(const std::array<double, 4>& d, double sigma2, int order,
                                   int m) const {
    using cd = std::complex<double>;
    constexpr int kSamples = 16;
    std::array<double, 2> out{0, 0};
    for (int i = 0; i <= nx_; ++i) {
      const double x = l_ * i / nx_;
      const double weight = (i == 0 || i == nx_) ? 0.5 : 1.0;
      const double C = std::cos(k_ * x), S = std::sin(k_ * x);
      const double C2 = std::cos(2 * k_ * x), S2 = std::sin(2 * k_ * x);
      cd ru = 0, rv = 0;
      for (int s = 0; s < kSamples; ++s) {
        const cd e = std::polar(1.0, 2 * std::numbers::pi * s / kSamples);
        const cd e2 = e * e;
        const cd u = 1.0 + e * a_ * C + e2 * (d[0] + d[1] * C2);
        const cd up = -e * a_ * k_ * S - e2 * 2.0 * k_ * d[1] * S2;
        const cd upp = -e * a_ * lam_ * C - e2 * 4.0 * lam_ * d[1] * C2;
        const cd v = 1.0 + e * C + e2 * (d[2] + d[3] * C2);
        const cd vp = -e * k_ * S - e2 * 2.0 * k_ * d[3] * S2;
        const cd vpp = -e * lam_ * C - e2 * 4.0 * lam_ * d[3] * C2;
        const cd q = v - 1.0;
        const cd R = t_.r0 + t_.r1 * q + t_.r2 * q * q / 2.0 + t_.r3 * q * q * q / 6.0;
        const cd R1 = t_.r1 + t_.r2 * q + t_.r3 * q * q / 2.0;
        const cd R2 = t_.r2 + t_.r3 * q;
        const cd wpp = R2 * vp * vp * u + R1 * (vpp * u + 2.0 * vp * up) + R * upp;
        const cd sigma = sigma0_ + e2 * sigma2;
        const cd fu = wpp + sigma * u * (1.0 - u);
        const cd fv = D_ * vpp - v + u;
        const cd back = std::pow(e, -order);
        ru += fu * back;
        rv += fv * back;
      }
      const double basis = std::cos(m * k_ * x);
      out[0] += weight * ru.real() / kSamples * basis;
      out[1] += weight * rv.real() / kSamples * basis;
    }
    const double norm = (m == 0 ? 1.0 : 2.0) / nx_;
    out[0] *= norm;
    out[1] *= norm;
    return out;
  }

  WeaklyNonlinear solve() const {
    auto second = [&](const std::array<double, 4>& d) {
      const auto p0 = projection(d, 0.0, 2, 0);
      const auto p2 = projection(d, 0.0, 2, 2);
      return std::array<double, 4>{p0[0], p2[0], p0[1], p2[1]};
    };
    const auto base = second({0, 0, 0, 0});
    std::vector<double> A(16);
    for (int c = 0; c < 4; ++c) {
      std::array<double, 4> unit{0, 0, 0, 0};
      unit[static_cast<std::size_t>(c)] = 1.0;
      const auto col = second(unit);
      for (int r = 0; r < 4; ++r) A[static_cast<std::size_t>(r * 4 + c)] = col[r] - base[r];
    }
    const auto d = dense_solve(A, {-base[0], -base[1], -base[2], -base[3]});
    const std::array<double, 4> dd{d[0], d[1], d[2], d[3]};
    // Left null vector of the mode matrix.
    const double y1 = 1.0, y2 = t_.r0 * lam_ + sigma0_;
    auto g = [&](double s2) {
      const auto p = projection(dd, s2, 3, 1);
      return y1 * p[0] + y2 * p[1];
    };
    const double g0 = g(0.0), g1 = g(1.0);
    return {lam_, sigma0_, a_, d[0], d[1], d[2], d[3], -g0 / (g1 - g0)};
  }

 private:
  double D_, l_;
  Taylor t_;
  int nx_;
  double lam_, k_, a_, sigma0_;
};

// Literal quadrature of the O(e^2) eigen-forcing G4 against the adjoint c cos(kx),
// divided by c l. Ingredients: phi0 = u1, psi0 = v1, phi1 = 2 u2, psi1 = 2 v2.
inline double g4_eta(const WeaklyNonlinear& w, double D, double l, const Taylor& t,
                     int nx = 4096) {
  const double L = w.lambda, k = std::sqrt(L), a = w.a, s = w.sigma0, s2 = w.sigma2;
  const double r1 = t.r1, r2 = t.r2, r3 = t.r3;
  const double c = D * a / r1;
  double sum = 0;
  for (int i = 0; i <= nx; ++i) {
    const double x = l * i / nx;
    const double C = std::cos(k * x), S = std::sin(k * x);
    const double C2 = std::cos(2 * k * x), S2 = std::sin(2 * k * x);
    const double u1 = a * C, u1p = -a * k * S, u1pp = -a * L * C;
    const double v1 = C, v1p = -k * S, v1pp = -L * C;
    const double u2 = w.d1 + w.d2 * C2, u2p = -2 * k * w.d2 * S2, u2pp = -4 * L * w.d2 * C2;
    const double v2 = w.d3 + w.d4 * C2, v2p = -2 * k * w.d4 * S2, v2pp = -4 * L * w.d4 * C2;
    const double f0 = u1, f0p = u1p, f0pp = u1pp;
    const double p0 = v1, p0p = v1p, p0pp = v1pp;
    const double f1 = 2 * u2, f1p = 2 * u2p, f1pp = 2 * u2pp;
    const double p1 = 2 * v2, p1p = 2 * v2p, p1pp = 2 * v2pp;
    const double G4 =
        -r1 * v1 * f1pp - r1 * v2 * f0pp - 0.5 * r2 * v1 * v1 * f0pp - r1 * u1 * p1pp -
        r1 * u2 * p0pp - r2 * v1 * p1pp - r2 * v1 * u1 * p0pp - r2 * v2 * p0pp -
        0.5 * r3 * v1 * v1 * p0pp - 2 * r1 * v1p * f1p - 2 * r1 * v2p * f0p -
        2 * r2 * v1 * v1p * f0p - 2 * r2 * v1p * p1p - 2 * r2 * v1p * u1 * p0p -
        2 * r2 * v2p * p0p - 2 * r3 * v1p * v1 * p0p - 2 * r1 * u1p * p1p - 2 * r1 * u2p * p0p -
        2 * r2 * u1p * v1 * p0p - r3 * v1p * v1p * p0 - r2 * v1pp * p1 - r2 * v1pp * u1 * p0 -
        r2 * v2pp * p0 - r3 * v1pp * v1 * p0 - 2 * r2 * v1p * u1p * p0 - r1 * u1pp * p1 -
        r1 * u2pp * p0 - r2 * u1pp * v1 * p0 - r2 * v1p * v1p * f0 - r1 * v1pp * f1 -
        r1 * v2pp * f0 - r2 * v1pp * v1 * f0 + 2 * s * u1 * f1 + 2 * s * u2 * f0 + s2 * f0;
    const double weight = (i == 0 || i == nx) ? 0.5 : 1.0;
    sum += weight * G4 * c * C;
  }
  sum *= l / nx;
  return sum / (c * l);
}

// Integral of the O(e) eigen-forcing G3 against the adjoint, which should vanish.
inline double g3_integral(const WeaklyNonlinear& w, double D, double l, const Taylor& t,
                          int nx = 4096) {
  const double L = w.lambda, k = std::sqrt(L), a = w.a, s = w.sigma0;
  const double r1 = t.r1, r2 = t.r2;
  const double c = D * a / r1;
  double sum = 0;
  for (int i = 0; i <= nx; ++i) {
    const double x = l * i / nx;
    const double C = std::cos(k * x), S = std::sin(k * x);
    const double u1 = a * C, u1p = -a * k * S, u1pp = -a * L * C;
    const double v1 = C, v1p = -k * S, v1pp = -L * C;
    const double f0 = u1, f0p = u1p, f0pp = u1pp;
    const double p0 = v1, p0p = v1p, p0pp = v1pp;
    const double G3 = -r1 * v1 * f0pp - r1 * u1 * p0pp - r2 * v1 * p0pp - 2 * r1 * v1p * f0p -
                      2 * r2 * v1p * p0p - 2 * r1 * u1p * p0p - r2 * v1pp * p0 - r1 * u1pp * p0 -
                      r1 * v1pp * f0 + 2 * s * u1 * f0;
    const double weight = (i == 0 || i == nx) ? 0.5 : 1.0;
    sum += weight * G3 * c * C;
  }
  return sum * l / nx;
}

}  // namespace dsm::oracle
