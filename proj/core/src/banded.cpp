#include "dsm/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsm/errors.hpp"

extern "C" {
void dgbtrf_(const int* m, const int* n, const int* kl, const int* ku, double* ab,
             const int* ldab, int* ipiv, int* info);
void dgbtrs_(const char* trans, const int* n, const int* kl, const int* ku, const int* nrhs,
             const double* ab, const int* ldab, const int* ipiv, double* b, const int* ldb,
             int* info);
}

namespace dsm {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), kv_(kl + ku), ld_(2 * kl + ku + 1), ab_(ld_ * n, 0.0),
      pivots_(n, 0) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty band matrix");
}

double& BandedMatrix::operator()(std::size_t i, std::size_t j) {
  if (!in_band(i, j) || i >= n_ || j >= n_) {
    throw Error(ErrorCode::InvalidArgument, "band matrix index outside the band");
  }
  factorized_ = false;
  return at(i, j);
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_ || !in_band(i, j)) return 0.0;
  return at(i, j);
}

void BandedMatrix::set_zero() {
  std::fill(ab_.begin(), ab_.end(), 0.0);
  factorized_ = false;
}

void BandedMatrix::factorize(double rel_pivot_tol) {
  double scale = 0.0;
  for (double x : ab_) scale = std::max(scale, std::abs(x));
  const double tiny = rel_pivot_tol * scale;

  int n = static_cast<int>(n_);
  int kl = static_cast<int>(kl_);
  int ku = static_cast<int>(ku_);
  int ld = static_cast<int>(ld_);
  int info = 0;
  std::vector<int> ipiv(n_);
  dgbtrf_(&n, &n, &kl, &ku, ab_.data(), &ld, ipiv.data(), &info);
  if (info < 0) throw Error(ErrorCode::InvalidArgument, "dgbtrf rejected its arguments");
  for (std::size_t j = 0; j < n_; ++j) {
    if (!(std::abs(at(j, j)) > tiny)) {
      throw Error(ErrorCode::SingularJacobian,
                  "zero pivot in column " + std::to_string(j) + " of the Jacobian");
    }
  }
  pivots_.assign(ipiv.begin(), ipiv.end());
  factorized_ = true;
}

void BandedMatrix::solve(std::span<double> b) const {
  if (!factorized_) throw Error(ErrorCode::InvalidArgument, "band matrix is not factorized");
  if (b.size() != n_) throw Error(ErrorCode::InvalidArgument, "right-hand side size mismatch");
  char trans = 'N';
  int n = static_cast<int>(n_);
  int kl = static_cast<int>(kl_);
  int ku = static_cast<int>(ku_);
  int ld = static_cast<int>(ld_);
  int nrhs = 1;
  int info = 0;
  dgbtrs_(&trans, &n, &kl, &ku, &nrhs, ab_.data(), &ld, pivots_.data(), b.data(), &n, &info);
  if (info != 0) throw Error(ErrorCode::InvalidArgument, "dgbtrs rejected its arguments");
}

}  // namespace dsm
