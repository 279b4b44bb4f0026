#include "doctest.h"

#include <cmath>
#include <random>

#include "dsm/asymptotics.hpp"
#include "dsm/banded.hpp"
#include "dsm/continuation.hpp"
#include "dsm/errors.hpp"
#include "dsm/pde_solver.hpp"

using namespace dsm;

namespace {

const MotilityModel kLogistic{};

ModelParams params(double sigma) { return {1.0, sigma, 20.0}; }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("Jacobian matches finite differences of the residual") {
  const auto e = expansion_coefficients(5, params(0.4), kLogistic);
  auto f = evaluate_approximate_steady_state(e, 0.05, 24);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (auto& x : f.u) x += dist(rng);
  for (auto& x : f.v) x += dist(rng);
  const auto p = params(0.37);
  const std::size_t dim = 2 * f.u.size();
  BandedMatrix jac(dim, 3, 3);
  assemble_jacobian(f, p, kLogistic, jac);
  const double h = 1e-6;
  for (std::size_t col = 0; col < dim; ++col) {
    Field plus = f, minus = f;
    auto& a = (col % 2 == 0) ? plus.u : plus.v;
    auto& b = (col % 2 == 0) ? minus.u : minus.v;
    a[col / 2] += h;
    b[col / 2] -= h;
    const auto rp = stationary_system(plus, p, kLogistic);
    const auto rm = stationary_system(minus, p, kLogistic);
    const BandedMatrix& cj = jac;
    for (std::size_t row = 0; row < dim; ++row) {
      const double fd = (rp[row] - rm[row]) / (2 * h);
      CHECK(cj(row, col) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("stationary system agrees with the solver residual") {
  const auto e = expansion_coefficients(6, params(0.45), kLogistic);
  const auto f = evaluate_approximate_steady_state(e, 0.05, 128);
  const auto p = params(0.45);
  const auto sys = stationary_system(f, p, kLogistic);
  double mu = 0, mv = 0;
  for (std::size_t i = 0; i < sys.size(); i += 2) {
    mu = std::max(mu, std::abs(sys[i]));
    mv = std::max(mv, std::abs(sys[i + 1]));
  }
  const auto r = stationary_residual(f, p, kLogistic);
  CHECK(mu == doctest::Approx(r.u).epsilon(1e-14));
  CHECK(mv == doctest::Approx(r.v).epsilon(1e-14));
}

TEST_CASE("Newton on the uniform state") {
  const Field ones(128, 20.0);
  const auto pt = newton_steady(ones, params(0.3), kLogistic);
  CHECK(pt.newton_iters <= 1);
  CHECK(pt.amplitude == 0.0);
  CHECK(pt.residual == 0.0);
}

TEST_CASE("Newton from the mode 6 pattern") {
  const auto p = params(0.49);
  const auto e = expansion_coefficients(6, p, kLogistic);
  const auto guess = evaluate_approximate_steady_state(e, epsilon_for_sigma(e, 0.49), 512);
  const auto pt = newton_steady(guess, p, kLogistic, 1e-10, 25);
  CHECK(pt.residual < 1e-10);
  CHECK(pt.amplitude > 0.02);
  CHECK(modal_spectrum(pt.field).dominant == 6);
  const auto r = stationary_residual(pt.field, p, kLogistic);
  CHECK(std::max(r.u, r.v) <= 1e-9);
}

TEST_CASE("Newton at the bifurcation point") {
  const auto e = expansion_coefficients(6, params(0.4), kLogistic);
  const auto p = params(e.sigma0);
  const auto guess = evaluate_approximate_steady_state(e, 0.01, 256);
  bool singular_or_trivial = false;
  try {
    const auto pt = newton_steady(guess, p, kLogistic);
    singular_or_trivial = pt.amplitude < 1e-6;
  } catch (const Error& err) {
    singular_or_trivial = err.code() == ErrorCode::SingularJacobian ||
                          err.code() == ErrorCode::MaxIterations;
  }
  CHECK(singular_or_trivial);
}

TEST_CASE("Newton preconditions") {
  Field bad(32, 20.0);
  bad.u[3] = std::nan("");
  CHECK(code_of([&] { newton_steady(bad, params(0.3), kLogistic); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { newton_steady(Field(32, 20.0), params(0.3), kLogistic, 0.0); }) ==
        ErrorCode::InvalidArgument);
  // A far-off guess with no iterations left.
  Field far(32, 20.0);
  for (std::size_t i = 0; i < far.u.size(); ++i) far.u[i] = 1.0 + 0.5 * std::cos(0.7 * static_cast<double>(i));
  CHECK(code_of([&] { newton_steady(far, params(0.3), kLogistic, 1e-10, 0); }) ==
        ErrorCode::MaxIterations);
}

TEST_CASE("mode 6 branch") {
  const auto p = params(0.0);
  const auto curve = trace_branch(6, p, kLogistic, 0.05, 1e-3);
  REQUIRE_FALSE(curve.points.empty());
  CHECK(curve.j == 6);
  CHECK(curve.termination == BranchTermination::ReachedSigmaMin);
  CHECK(curve.points.back().sigma == doctest::Approx(0.05).epsilon(1e-12));

  const auto e = expansion_coefficients(6, p, kLogistic);
  CHECK(curve.points.front().sigma == doctest::Approx(e.sigma0 - 1e-3));
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    CHECK(b.sigma < a.sigma);
    CHECK(b.amplitude > a.amplitude);
    CHECK(a.sigma - b.sigma <= 5e-2 + 1e-12);
  }
  for (const auto& pt : curve.points) {
    CHECK(pt.residual <= 1e-10);
    ModelParams q = p;
    q.sigma = pt.sigma;
    const auto r = stationary_residual(pt.field, q, kLogistic);
    CHECK(std::max(r.u, r.v) <= 1e-9);
    CHECK(pt.field.all_positive());
    CHECK(modal_spectrum(pt.field).dominant == 6);
  }
}

TEST_CASE("near-onset amplitude follows the asymptotic law") {
  const auto p = params(0.0);
  const auto e = expansion_coefficients(6, p, kLogistic);
  ContinuationOptions opts;
  opts.n = 512;
  for (double eps : {0.05, 0.02, 0.01}) {
    const double sigma = e.sigma0 + eps * eps * e.sigma2;
    ModelParams q = p;
    q.sigma = sigma;
    const auto pt = newton_steady(evaluate_approximate_steady_state(e, eps, opts.n), q, kLogistic);
    const double amp = std::abs(mode_coefficient(pt.field, 6));
    const double predicted = std::sqrt(amplitude_prediction(e, sigma));
    CAPTURE(eps);
    CHECK(std::abs(amp / predicted - 1) <= (eps <= 0.02 ? 0.03 : 0.10));
  }
}

TEST_CASE("branch edge cases") {
  const auto p = params(0.0);
  SUBCASE("sigma_min above the seed gives an empty branch") {
    const auto curve = trace_branch(6, p, kLogistic, 0.6, 1e-3);
    CHECK(curve.points.empty());
    CHECK(curve.termination == BranchTermination::ReachedSigmaMin);
  }
  SUBCASE("mode 12 has no branch") {
    CHECK(code_of([&] { trace_branch(12, p, kLogistic, 0.05, 1e-3); }) == ErrorCode::SeedFailure);
  }
  SUBCASE("step must be positive") {
    CHECK(code_of([&] { trace_branch(6, p, kLogistic, 0.05, 0.0); }) == ErrorCode::InvalidArgument);
  }
  SUBCASE("tight box stops the trace") {
    ContinuationOptions opts;
    opts.n = 128;
    opts.b_max = 1.3;
    const auto curve = trace_branch(6, p, kLogistic, 0.05, 1e-3, opts);
    CHECK(curve.termination == BranchTermination::AmplitudeBound);
    for (const auto& pt : curve.points) {
      for (double u : pt.field.u) CHECK(u <= 1.3);
    }
  }
  SUBCASE("the mode 4 branch turns back") {
    ContinuationOptions opts;
    opts.n = 256;
    const auto curve = trace_branch(4, p, kLogistic, 0.05, 1e-3, opts);
    CHECK(curve.termination == BranchTermination::FoldLimit);
    CHECK(curve.points.size() > 3);
  }
}

TEST_CASE("dynamic stability of branch points") {
  const auto p = params(0.0);
  ContinuationOptions opts;
  opts.n = 256;

  SUBCASE("mode 6 point is an attractor") {
    const auto e = expansion_coefficients(6, p, kLogistic);
    ModelParams q = p;
    q.sigma = e.sigma0 - 0.01;
    const auto pt = newton_steady(evaluate_approximate_steady_state(e, epsilon_for_sigma(e, q.sigma), opts.n), q, kLogistic);
    SimConfig cfg;
    cfg.params = q;
    cfg.n = opts.n;
    cfg.init = ExplicitField{pt.field};
    cfg.noise = {1e-4, 3, false};
    cfg.keep_snapshots = false;
    const auto traj = simulate(cfg);
    CHECK(traj.steady);
    CHECK(max_distance(traj.final, pt.field) < 1e-5);
  }
  SUBCASE("mode 4 point departs towards mode 6") {
    const auto e = expansion_coefficients(4, p, kLogistic);
    ModelParams q = p;
    q.sigma = e.sigma0 - 0.01;
    const auto pt = newton_steady(evaluate_approximate_steady_state(e, epsilon_for_sigma(e, q.sigma), opts.n), q, kLogistic);
    REQUIRE(modal_spectrum(pt.field).dominant == 4);
    SimConfig cfg;
    cfg.params = q;
    cfg.n = opts.n;
    cfg.init = ExplicitField{pt.field};
    cfg.noise = {1e-4, 3, false};
    cfg.keep_snapshots = false;
    const auto traj = simulate(cfg);
    CHECK(max_distance(traj.final, pt.field) > 1e-2);
    CHECK(modal_spectrum(traj.final).dominant == 6);
  }
}
