#pragma once

#include <string_view>
#include <vector>

#include "dsm/field.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/motility.hpp"

namespace dsm {

struct BranchPoint {
  double sigma = 0.0;
  Field field;
  double amplitude = 0.0;  // max |u - 1|
  int newton_iters = 0;
  double residual = 0.0;
};

enum class BranchTermination {
  ReachedSigmaMin,
  AmplitudeBound,
  NewtonFailure,
  FoldLimit,
};

std::string_view to_string(BranchTermination t) noexcept;

struct BranchCurve {
  int j = 0;
  std::vector<BranchPoint> points;
  BranchTermination termination = BranchTermination::ReachedSigmaMin;
};

/// Residual of the discrete stationary system, interleaved as
/// (F_u0, F_v0, F_u1, F_v1, ...). Same equations as stationary_residual.
std::vector<double> stationary_system(const Field& f, const ModelParams& p,
                                      const MotilityModel& m);

class BandedMatrix;

/// Analytic Jacobian of stationary_system in the interleaved ordering
/// (bandwidth 3 on each side).
void assemble_jacobian(const Field& f, const ModelParams& p, const MotilityModel& m,
                       BandedMatrix& jac);

/// Newton solve at fixed sigma = p.sigma, converged when the residual
/// max-norm drops below tol. Throws MaxIterations or SingularJacobian.
BranchPoint newton_steady(const Field& init, const ModelParams& p, const MotilityModel& m,
                          double tol = 1e-10, int max_iters = 25);

struct ContinuationOptions {
  int n = 512;
  double delta = 1e-3;  // seed offset below sigma0
  double ds_min = 1e-5;
  double ds_max = 5e-2;
  double newton_tol = 1e-10;
  int max_iters = 25;
  double b_max = 100.0;
  int max_points = 5000;
};

/// Traces the steady branch born at mode j towards smaller sigma by secant
/// pseudo-arclength continuation, starting from the asymptotic pattern at
/// sigma0 - delta. The arclength uses the mean-square field norm plus sigma^2.
/// Throws SeedFailure when the first solve fails.
BranchCurve trace_branch(int j, const ModelParams& p, const MotilityModel& m, double sigma_min,
                         double ds, const ContinuationOptions& opts = {});

}  // namespace dsm
