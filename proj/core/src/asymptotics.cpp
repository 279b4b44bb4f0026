#include "dsm/asymptotics.hpp"

#include <cmath>

#include "dsm/errors.hpp"

namespace dsm {

std::string_view to_string(BranchVerdict v) noexcept {
  switch (v) {
    case BranchVerdict::UnstableWrongMode: return "UnstableWrongMode";
    case BranchVerdict::StableAdmissible: return "StableAdmissible";
    case BranchVerdict::UnstableAdmissible: return "UnstableAdmissible";
    case BranchVerdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

namespace {

Expansion closed_form(int j, const ModelParams& p, const MotilityTaylor& t) {
  Expansion e;
  e.j = j;
  e.l = p.l;
  e.lambda = eigenvalue_lambda(j, p.l);
  const double lam = e.lambda;
  e.sigma0 = bifurcation_sigma_at(lam, p, t);
  if (!(e.sigma0 > 0.0)) {
    throw Error(ErrorCode::NonpositiveSigma0,
                "mode " + std::to_string(j) + " has sigma0 <= 0; no branch bifurcates");
  }
  e.a = 1.0 + p.D * lam;
  e.c = p.D * e.a / t.r1;

  e.d1 = -0.5 * e.a * e.a;
  e.d3 = e.d1;
  const double forcing = lam * t.r2 + 2.0 * lam * t.r1 * e.a + 0.5 * e.sigma0 * e.a * e.a;
  const double denom =
      -4.0 * t.r1 * lam + (-4.0 * t.r0 * lam - e.sigma0) * (1.0 + 4.0 * p.D * lam);
  const double scale = std::abs(4.0 * t.r1 * lam) +
                       std::abs((4.0 * t.r0 * lam + e.sigma0) * (1.0 + 4.0 * p.D * lam));
  if (std::abs(denom) < 1e-10 * scale) {
    throw Error(ErrorCode::ResonantDenominator,
                "mode " + std::to_string(j) + " resonates with mode " + std::to_string(2 * j));
  }
  e.d4 = forcing / denom;
  e.d2 = (1.0 + 4.0 * p.D * lam) * e.d4;

  const double a = e.a;
  e.sigma2 = -t.r2 * lam * (3.0 / 8.0 + e.d3 / a + e.d4 / (2.0 * a)) -
             t.r1 * lam * (e.d1 / a + e.d2 / (2.0 * a) + 0.5 * e.d4 + e.d3) -
             2.0 * e.sigma0 * (e.d1 + 0.5 * e.d2) - t.r3 * lam / (8.0 * a);
  return e;
}

double eta_closed_form(const Expansion& e, const MotilityTaylor& t) {
  const double lam = e.lambda;
  const double a = e.a;
  return 0.25 * t.r1 * lam * (6.0 * e.d1 + 3.0 * e.d2 + (6.0 * e.d3 + 3.0 * e.d4) * a) +
         (1.0 / 16.0) * t.r2 * lam * (24.0 * e.d3 + 12.0 * e.d4 + 9.0 * a) +
         (3.0 / 16.0) * t.r3 * lam + 3.0 * e.sigma0 * a * (e.d1 + 0.5 * e.d2) +
         0.5 * e.sigma2 * a;
}

}  // namespace

double eigen_normalization(const Expansion& e, const ModelParams& p, const MotilityModel& m) {
  const double r1 = m.eval(1.0, 1);
  return 0.5 * e.l * (p.D * e.a * e.a / r1 - p.D * e.lambda);
}

Expansion expansion_coefficients(int j, const ModelParams& p, const MotilityModel& m,
                                 const BifurcationSummary& summary) {
  p.validate();
  const auto t = taylor_at_unity(m);
  Expansion e = closed_form(j, p, t);
  if (j == summary.i_a) {
    e.eta = eta_closed_form(e, t);
    // gamma2 = -(integral of G4 times the adjoint) / normalization, with the
    // integral equal to c l eta.
    e.gamma2 = -e.c * e.l * *e.eta / eigen_normalization(e, p, m);
  }
  e.verdict = branch_stability(j, summary, e);
  return e;
}

Expansion expansion_coefficients(int j, const ModelParams& p, const MotilityModel& m) {
  std::optional<BifurcationSummary> summary;
  try {
    summary = scan_modes(p, m);
  } catch (const Error&) {
    summary.reset();
  }
  if (summary) return expansion_coefficients(j, p, m, *summary);
  p.validate();
  return closed_form(j, p, taylor_at_unity(m));
}

double eta(const ModelParams& p, const MotilityModel& m, const BifurcationSummary& summary) {
  const auto e = expansion_coefficients(summary.i_a, p, m, summary);
  return *e.eta;
}

BranchVerdict branch_stability(int j, const BifurcationSummary& summary, const Expansion& e) {
  if (j != summary.i_a) return BranchVerdict::UnstableWrongMode;
  if (!e.eta) {
    throw Error(ErrorCode::InvalidArgument, "expansion for the admissible mode lacks eta");
  }
  if (*e.eta > 0.0) return BranchVerdict::StableAdmissible;
  if (*e.eta < 0.0) return BranchVerdict::UnstableAdmissible;
  return BranchVerdict::Indeterminate;
}

Field evaluate_approximate_steady_state(const Expansion& e, double epsilon,
                                        std::span<const double> grid, double u1_scale) {
  if (grid.size() < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 points");
  Field f(static_cast<int>(grid.size()) - 1, e.l);
  const double k = std::sqrt(e.lambda);
  const double eps2 = epsilon * epsilon;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c1 = std::cos(k * grid[i]);
    const double c2 = std::cos(2.0 * k * grid[i]);
    f.u[i] = 1.0 + epsilon * u1_scale * e.a * c1 + eps2 * (e.d1 + e.d2 * c2);
    f.v[i] = 1.0 + epsilon * c1 + eps2 * (e.d3 + e.d4 * c2);
  }
  return f;
}

Field evaluate_approximate_steady_state(const Expansion& e, double epsilon, int n,
                                        double u1_scale) {
  Field f(n, e.l);
  const double eps2 = epsilon * epsilon;
  for (int i = 0; i <= n; ++i) {
    const double c1 = grid_cosine(e.j, i, n);
    const double c2 = grid_cosine(2L * e.j, i, n);
    const auto idx = static_cast<std::size_t>(i);
    f.u[idx] = 1.0 + epsilon * u1_scale * e.a * c1 + eps2 * (e.d1 + e.d2 * c2);
    f.v[idx] = 1.0 + epsilon * c1 + eps2 * (e.d3 + e.d4 * c2);
  }
  return f;
}

double epsilon_for_sigma(const Expansion& e, double sigma) {
  const double ratio = (sigma - e.sigma0) / e.sigma2;
  if (ratio < 0.0 || !std::isfinite(ratio)) {
    throw Error(ErrorCode::WrongSideOfBranch,
                "sigma=" + std::to_string(sigma) + " lies on the side of mode " +
                    std::to_string(e.j) + " where no branch exists");
  }
  return std::sqrt(ratio);
}

double amplitude_prediction(const Expansion& e, double sigma) {
  const double eps = epsilon_for_sigma(e, sigma);
  return eps * eps * e.a * e.a;
}

}  // namespace dsm
