#include "dsm/linear_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dsm/errors.hpp"

namespace dsm {

void ModelParams::validate() const {
  if (!(D > 0.0) || !std::isfinite(D)) {
    throw Error(ErrorCode::InvalidArgument, "D must be positive");
  }
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw Error(ErrorCode::InvalidArgument, "l must be positive");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be nonnegative");
  }
}

double eigenvalue_lambda(int j, double l) {
  if (j < 0 || !(l > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "eigenvalue needs j >= 0 and l > 0");
  }
  const double k = std::numbers::pi * static_cast<double>(j) / l;
  return k * k;
}

double bifurcation_sigma_at(double lambda, const ModelParams& p, const MotilityTaylor& t) {
  return -(t.r1 / (1.0 + p.D * lambda) + t.r0) * lambda;
}

double bifurcation_sigma(int j, const ModelParams& p, const MotilityModel& m) {
  if (j < 1) {
    throw Error(ErrorCode::InvalidArgument, "bifurcation values are defined for j >= 1");
  }
  return bifurcation_sigma_at(eigenvalue_lambda(j, p.l), p, taylor_at_unity(m));
}

DispersionQuadratic dispersion_quadratic(double lambda, const ModelParams& p,
                                         const MotilityTaylor& t) {
  return {(p.D + t.r0) * lambda + 1.0 + p.sigma,
          (p.sigma + t.r0 * lambda) * (1.0 + p.D * lambda) + t.r1 * lambda};
}

std::pair<std::complex<double>, std::complex<double>> dispersion_roots(
    double lambda, const ModelParams& p, const MotilityModel& m) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  }
  const auto q = dispersion_quadratic(lambda, p, taylor_at_unity(m));
  const double b = q.linear;
  const double c = q.constant;
  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    // Cancellation-free pair: the large root from the quadratic formula, the
    // other from Vieta.
    const double s = std::sqrt(disc);
    const double big = -0.5 * (b + std::copysign(s, b));
    const double other = big != 0.0 ? c / big : 0.0;
    const double hi = std::max(big, other);
    const double lo = std::min(big, other);
    return {{hi, 0.0}, {lo, 0.0}};
  }
  const double re = -0.5 * b;
  const double im = 0.5 * std::sqrt(-disc);
  return {{re, im}, {re, -im}};
}

CriticalValues critical_sigma(const ModelParams& p, const MotilityModel& m) {
  const auto t = taylor_at_unity(m);
  if (!(t.r1 + t.r0 < 0.0)) {
    throw Error(ErrorCode::NoInstabilityWindow,
                "r'(1) + r(1) >= 0: the uniform state has no instability window");
  }
  const double lambda_star = (std::sqrt(-t.r1 / t.r0) - 1.0) / p.D;
  const double gap = std::sqrt(-t.r1) - std::sqrt(t.r0);
  return {gap * gap / p.D, lambda_star};
}

int default_mode_window(const ModelParams& p, const MotilityModel& m) {
  const auto crit = critical_sigma(p, m);
  const double reach = p.l * std::sqrt(std::max(crit.lambda_star, 0.0)) / std::numbers::pi;
  return std::max(1, 4 * static_cast<int>(std::ceil(reach)));
}

BifurcationSummary scan_modes(const ModelParams& p, const MotilityModel& m, int j_max) {
  p.validate();
  if (j_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "j_max must be at least 1");
  }
  const auto crit = critical_sigma(p, m);
  const auto t = taylor_at_unity(m);

  BifurcationSummary out;
  out.sigma_c = crit.sigma_c;
  out.lambda_star = crit.lambda_star;
  out.modes.reserve(static_cast<std::size_t>(j_max));
  for (int j = 1; j <= j_max; ++j) {
    ModeInfo info;
    info.j = j;
    info.lambda_j = eigenvalue_lambda(j, p.l);
    info.sigma_j = bifurcation_sigma_at(info.lambda_j, p, t);
    info.a_j = 1.0 + p.D * info.lambda_j;
    info.rho_pair = dispersion_roots(info.lambda_j, p, m);
    out.modes.push_back(info);
  }

  if (out.modes.back().sigma_j > 0.0) {
    throw Error(ErrorCode::ScanWindowTooSmall,
                "sigma_j is still positive at j_max=" + std::to_string(j_max));
  }
  for (const auto& info : out.modes) {
    if (info.sigma_j > 0.0) out.i_c = info.j;
  }
  if (out.i_c == 0) {
    throw Error(ErrorCode::NoBifurcation, "no mode has a positive bifurcation value");
  }

  out.i_a = 1;
  out.sigma_a = out.modes.front().sigma_j;
  for (int j = 2; j <= out.i_c; ++j) {
    if (out.mode(j).sigma_j > out.sigma_a) {
      out.sigma_a = out.mode(j).sigma_j;
      out.i_a = j;
    }
  }

  out.ordering.resize(static_cast<std::size_t>(out.i_c));
  std::iota(out.ordering.begin(), out.ordering.end(), 1);
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](int a, int b) { return out.mode(a).sigma_j < out.mode(b).sigma_j; });
  return out;
}

BifurcationSummary scan_modes(const ModelParams& p, const MotilityModel& m) {
  return scan_modes(p, m, default_mode_window(p, m));
}

std::string_view to_string(UniformStability s) noexcept {
  switch (s) {
    case UniformStability::StableByMonotonicity: return "StableByMonotonicity";
    case UniformStability::StableByLargeSigma: return "StableByLargeSigma";
    case UniformStability::Unstable: return "Unstable";
    case UniformStability::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

UniformClassification classify_uniform_state(const ModelParams& p, const MotilityModel& m,
                                             int j_max) {
  p.validate();
  const auto t = taylor_at_unity(m);
  const double slope_sum = t.r1 + t.r0;

  UniformClassification out;
  if (j_max <= 0) {
    j_max = slope_sum < 0.0 ? default_mode_window(p, m) : 1;
  }
  out.j_max = j_max;
  out.max_growth = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= j_max; ++j) {
    const double lambda = eigenvalue_lambda(j, p.l);
    out.max_growth = std::max(out.max_growth, dispersion_roots(lambda, p, m).first.real());
    if (j >= 1 && p.sigma < bifurcation_sigma_at(lambda, p, t)) {
      out.unstable_modes.push_back(j);
    }
  }

  // Sufficient conditions first; the first one that fires wins.
  if (slope_sum >= 0.0) {
    out.verdict = UniformStability::StableByMonotonicity;
    return out;
  }
  const auto crit = critical_sigma(p, m);
  if (p.sigma * p.D > -slope_sum || p.sigma > crit.sigma_c) {
    out.verdict = UniformStability::StableByLargeSigma;
    return out;
  }
  out.verdict = out.unstable_modes.empty() ? UniformStability::Indeterminate
                                           : UniformStability::Unstable;
  return out;
}

}  // namespace dsm
