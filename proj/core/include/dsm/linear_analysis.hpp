#pragma once

#include <complex>
#include <string_view>
#include <utility>
#include <vector>

#include "dsm/motility.hpp"

namespace dsm {

/// Scalars of the colony model: AHL diffusion D, growth rate sigma, domain length l.
struct ModelParams {
  double D = 1.0;
  double sigma = 0.0;
  double l = 20.0;

  void validate() const;
};

/// Spectral data of one Neumann cosine mode cos(pi j x / l).
struct ModeInfo {
  int j = 0;
  double lambda_j = 0.0;
  double sigma_j = 0.0;
  double a_j = 1.0;
  /// Dispersion roots at the current sigma, descending real part.
  std::pair<std::complex<double>, std::complex<double>> rho_pair;
};

struct BifurcationSummary {
  std::vector<ModeInfo> modes;  // j = 1..j_max
  int i_c = 0;
  int i_a = 0;
  double sigma_a = 0.0;
  double sigma_c = 0.0;
  double lambda_star = 0.0;
  /// Mode indices 1..i_c sorted by ascending bifurcation value.
  std::vector<int> ordering;

  const ModeInfo& mode(int j) const { return modes.at(static_cast<std::size_t>(j - 1)); }
};

double eigenvalue_lambda(int j, double l);

/// Bifurcation value sigma_j = -[r'(1)/(1 + D lambda_j) + r(1)] lambda_j.
double bifurcation_sigma(int j, const ModelParams& p, const MotilityModel& m);

/// Same closed form evaluated at a real wavenumber-squared lambda.
double bifurcation_sigma_at(double lambda, const ModelParams& p, const MotilityTaylor& t);

/// Coefficients of rho^2 + b rho + c = 0 for the linearization at (1,1).
struct DispersionQuadratic {
  double linear;
  double constant;
};
DispersionQuadratic dispersion_quadratic(double lambda, const ModelParams& p,
                                         const MotilityTaylor& t);

std::pair<std::complex<double>, std::complex<double>> dispersion_roots(
    double lambda, const ModelParams& p, const MotilityModel& m);

struct CriticalValues {
  double sigma_c;
  double lambda_star;
};

/// Continuum envelope maximum of sigma(lambda). Requires r'(1) + r(1) < 0.
CriticalValues critical_sigma(const ModelParams& p, const MotilityModel& m);

/// 4 * ceil(l sqrt(lambda*) / pi), at least 1.
int default_mode_window(const ModelParams& p, const MotilityModel& m);

BifurcationSummary scan_modes(const ModelParams& p, const MotilityModel& m, int j_max);
BifurcationSummary scan_modes(const ModelParams& p, const MotilityModel& m);

enum class UniformStability {
  StableByMonotonicity,
  StableByLargeSigma,
  Unstable,
  Indeterminate,
};

std::string_view to_string(UniformStability s) noexcept;

struct UniformClassification {
  UniformStability verdict = UniformStability::Indeterminate;
  std::vector<int> unstable_modes;
  /// max Re(rho) over modes 0..j_max
  double max_growth = 0.0;
  int j_max = 0;
};

UniformClassification classify_uniform_state(const ModelParams& p, const MotilityModel& m,
                                             int j_max = 0);

}  // namespace dsm
