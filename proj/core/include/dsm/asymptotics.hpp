#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "dsm/field.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/motility.hpp"

namespace dsm {

enum class BranchVerdict {
  UnstableWrongMode,
  StableAdmissible,
  UnstableAdmissible,
  Indeterminate,  // admissible mode with eta == 0
};

std::string_view to_string(BranchVerdict v) noexcept;

/// Second-order weakly nonlinear expansion of the steady branch born at mode j:
///
///   u = 1 + eps a cos(kx) + eps^2 (d1 + d2 cos(2kx))
///   v = 1 + eps   cos(kx) + eps^2 (d3 + d4 cos(2kx)),   k = sqrt(lambda_j)
///   sigma = sigma0 + eps^2 sigma2.
struct Expansion {
  int j = 0;
  double lambda = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double a = 0.0;
  double c = 0.0;  // adjoint u-coefficient, D (1 + D lambda) / r'(1)
  double d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
  double l = 0.0;
  // Populated only for the admissible mode.
  std::optional<double> eta;
  std::optional<double> gamma2;
  std::optional<BranchVerdict> verdict;
};

/// Closed-form coefficients for mode j. eta, gamma2 and the verdict are filled
/// when j matches summary.i_a; the verdict is filled for every j.
Expansion expansion_coefficients(int j, const ModelParams& p, const MotilityModel& m,
                                 const BifurcationSummary& summary);

/// Same, scanning the mode window internally to find the admissible mode.
/// If the scan is impossible the stability fields stay empty.
Expansion expansion_coefficients(int j, const ModelParams& p, const MotilityModel& m);

/// Sign-determining constant of the second eigenvalue correction on the
/// admissible branch (closed form).
double eta(const ModelParams& p, const MotilityModel& m, const BifurcationSummary& summary);

/// Normalization integral of the eigenvalue problem at the admissible mode,
/// (l/2) (D (1 + D lambda)^2 / r'(1) - D lambda); negative under r' < 0.
double eigen_normalization(const Expansion& e, const ModelParams& p, const MotilityModel& m);

BranchVerdict branch_stability(int j, const BifurcationSummary& summary, const Expansion& e);

/// Approximate steady state at arbitrary positions. u1_scale multiplies the
/// leading u-amplitude a only.
Field evaluate_approximate_steady_state(const Expansion& e, double epsilon,
                                        std::span<const double> grid, double u1_scale = 1.0);

/// Same on the uniform grid with n intervals, built from grid_cosine so that
/// reflection parity of the pattern is exact on the grid.
Field evaluate_approximate_steady_state(const Expansion& e, double epsilon, int n,
                                        double u1_scale = 1.0);

/// sqrt((sigma - sigma0) / sigma2), positive root.
double epsilon_for_sigma(const Expansion& e, double sigma);

/// Squared leading-mode amplitude eps^2 a^2 predicted at sigma.
double amplitude_prediction(const Expansion& e, double sigma);

}  // namespace dsm
