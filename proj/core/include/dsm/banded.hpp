#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsm {

/// Square band matrix with LU factorization by partial pivoting.
///
/// Column-major band storage with kl extra rows above the upper band for
/// pivoting fill-in; factorization and solves go through LAPACK dgbtrf/dgbtrs.
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  /// Reference to entry (i, j); requires j - ku <= i <= j + kl.
  double& operator()(std::size_t i, std::size_t j);
  double operator()(std::size_t i, std::size_t j) const;

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return i + ku_ >= j && j + kl_ >= i;
  }

  void set_zero();

  /// In-place LU. Throws SingularJacobian on a pivot below
  /// rel_pivot_tol * max|a_ij|.
  void factorize(double rel_pivot_tol = 1e-14);

  /// Solves A x = b in place using the stored factorization.
  void solve(std::span<double> b) const;

  bool factorized() const noexcept { return factorized_; }

 private:
  double& at(std::size_t i, std::size_t j) { return ab_[(kv_ + i - j) + j * ld_]; }
  double at(std::size_t i, std::size_t j) const { return ab_[(kv_ + i - j) + j * ld_]; }

  std::size_t n_, kl_, ku_, kv_, ld_;
  std::vector<double> ab_;
  std::vector<int> pivots_;
  bool factorized_ = false;
};

}  // namespace dsm
