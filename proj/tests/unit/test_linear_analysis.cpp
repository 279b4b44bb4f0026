#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dsm/errors.hpp"
#include "dsm/linear_analysis.hpp"
#include "oracles.hpp"

using namespace dsm;

namespace {

const ModelParams kBase{1.0, 0.0, 20.0};
const MotilityModel kLogistic{};

// r with r(1) = a and r'(1) = b for a chosen, otherwise exponential.
MotilityModel exponential_with(double r1_over_r0) {
  const double rate = -r1_over_r0;
  return MotilityModel::exponential(std::exp(rate), rate);  // r(1) = 1
}

}  // namespace

TEST_CASE("eigenvalues") {
  CHECK(eigenvalue_lambda(0, 20.0) == 0.0);
  CHECK(eigenvalue_lambda(6, 20.0) == doctest::Approx(0.09 * std::numbers::pi * std::numbers::pi));
  CHECK(std::sqrt(eigenvalue_lambda(6, 20.0)) == doctest::Approx(0.9425).epsilon(1e-4));
  CHECK(eigenvalue_lambda(1, std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eigenvalue_lambda(-1, 20.0), Error);
  CHECK_THROWS_AS(eigenvalue_lambda(1, 0.0), Error);
}

TEST_CASE("bifurcation values against the determinant oracle") {
  const auto t = oracle::logistic_taylor(8.0);
  for (int j = 1; j <= 14; ++j) {
    const double ref = oracle::zero_det_sigma(oracle::lambda(j, 20.0), 1.0, t);
    CHECK(bifurcation_sigma(j, kBase, kLogistic) == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
  }
  CHECK(std::abs(bifurcation_sigma(6, kBase, kLogistic) - 0.4967) < 5e-5);
  CHECK(std::abs(bifurcation_sigma(9, kBase, kLogistic) - 0.3337) < 5e-5);
  CHECK(std::abs(bifurcation_sigma(11, kBase, kLogistic) - 0.0054) < 5e-5);
  CHECK_THROWS_AS(bifurcation_sigma(0, kBase, kLogistic), Error);
}

TEST_CASE("bifurcation value vanishes on the discriminant root") {
  // r'(1) = -r(1) (1 + D lambda_3) makes sigma_3 = 0.
  const double lam = eigenvalue_lambda(3, 20.0);
  const auto m = exponential_with(-(1.0 + lam));
  CHECK(std::abs(bifurcation_sigma(3, kBase, m)) < 1e-14);
}

TEST_CASE("constant term of the quadratic vanishes at sigma_j") {
  const auto t = taylor_at_unity(kLogistic);
  for (int j = 1; j <= 12; ++j) {
    ModelParams p = kBase;
    p.sigma = bifurcation_sigma(j, kBase, kLogistic);
    const double lam = eigenvalue_lambda(j, p.l);
    const auto q = dispersion_quadratic(lam, p, t);
    const double scale = std::max({1.0, std::abs(p.sigma * (1 + lam)), std::abs(t.r1 * lam)});
    CHECK(std::abs(q.constant) <= 1e-12 * scale);
  }
}

TEST_CASE("dispersion roots") {
  SUBCASE("lambda = 0 factors") {
    ModelParams p = kBase;
    p.sigma = 0.3;
    const auto [hi, lo] = dispersion_roots(0.0, p, kLogistic);
    CHECK(hi.real() == doctest::Approx(-0.3));
    CHECK(lo.real() == doctest::Approx(-1.0));
    CHECK(hi.imag() == 0.0);
  }
  SUBCASE("zero root at the bifurcation value") {
    ModelParams p = kBase;
    p.sigma = bifurcation_sigma(6, kBase, kLogistic);
    const auto roots = dispersion_roots(eigenvalue_lambda(6, 20), p, kLogistic);
    CHECK(std::abs(roots.first) < 1e-10);
  }
  SUBCASE("instability below sigma_6") {
    ModelParams p = kBase;
    p.sigma = 0.3;
    const auto roots = dispersion_roots(eigenvalue_lambda(6, 20), p, kLogistic);
    CHECK(roots.first.imag() == 0.0);
    CHECK(roots.first.real() > 0.0);
  }
  SUBCASE("match the eigenvalues of the linearization and obey Vieta") {
    const auto t = taylor_at_unity(kLogistic);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lam_dist(0.0, 6.0), sig_dist(0.0, 2.0);
    for (int k = 0; k < 300; ++k) {
      ModelParams p = kBase;
      p.sigma = sig_dist(rng);
      const double lam = lam_dist(rng);
      const auto roots = dispersion_roots(lam, p, kLogistic);
      const auto ref = oracle::eigenvalues(oracle::linear_matrix(lam, p.sigma, p.D, oracle::logistic_taylor(8)));
      CHECK(std::abs(roots.first - ref[0]) <= 1e-9 * std::max(1.0, std::abs(ref[0])));
      CHECK(std::abs(roots.second - ref[1]) <= 1e-9 * std::max(1.0, std::abs(ref[1])));
      const auto q = dispersion_quadratic(lam, p, t);
      const auto sum = roots.first + roots.second;
      const auto prod = roots.first * roots.second;
      CHECK(std::abs(sum.real() + q.linear) <= 1e-12 * std::max(1.0, std::abs(q.linear)));
      CHECK(std::abs(prod.real() - q.constant) <= 1e-12 * std::max(1.0, std::abs(q.constant)));
      CHECK(roots.first.real() >= roots.second.real());
    }
  }
  CHECK_THROWS_AS(dispersion_roots(-1.0, kBase, kLogistic), Error);
}

TEST_CASE("critical values") {
  const auto crit = critical_sigma(kBase, kLogistic);
  CHECK(std::abs(crit.sigma_c - 0.5) < 1e-12);
  CHECK(std::abs(crit.lambda_star - 1.0) < 1e-12);

  SUBCASE("envelope maximum") {
    const auto t = taylor_at_unity(kLogistic);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 4.0 * crit.lambda_star);
    for (int k = 0; k < 1000; ++k) {
      CHECK(bifurcation_sigma_at(dist(rng), kBase, t) <= crit.sigma_c + 1e-12);
    }
    CHECK(bifurcation_sigma_at(crit.lambda_star, kBase, t) == doctest::Approx(crit.sigma_c));
  }
  SUBCASE("boundary r'(1) = -r(1)") {
    CHECK_THROWS_AS(critical_sigma(kBase, exponential_with(-1.0)), Error);
    const auto m = exponential_with(-1.0 - 1e-9);
    CHECK(critical_sigma(kBase, m).sigma_c < 1e-15);
  }
  SUBCASE("no window") {
    try {
      critical_sigma(kBase, MotilityModel::exponential(1.0, 0.5));
      FAIL("expected NoInstabilityWindow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoInstabilityWindow);
    }
  }
}

TEST_CASE("mode scan for the logistic setup") {
  const auto s = scan_modes(kBase, kLogistic, 30);
  CHECK(s.i_c == 11);
  CHECK(s.i_a == 6);
  CHECK(s.sigma_a == bifurcation_sigma(6, kBase, kLogistic));
  CHECK(std::abs(s.sigma_a - 0.4967) < 5e-5);
  CHECK(s.sigma_a <= s.sigma_c);
  // By hand: sigma_1 = 0.03582 lies above sigma_11 = 0.0054.
  const std::vector<int> expected{11, 1, 2, 10, 3, 9, 4, 8, 5, 7, 6};
  CHECK(s.ordering == expected);
  CHECK(std::abs(s.mode(1).sigma_j - 0.035823) < 1e-6);
  for (int j = 1; j <= s.i_c; ++j) {
    CHECK(s.mode(j).sigma_j > 0.0);
    CHECK(s.sigma_a >= s.mode(j).sigma_j);
    CHECK(s.mode(j).a_j == doctest::Approx(1.0 + s.mode(j).lambda_j));
  }
  CHECK(s.mode(12).sigma_j < 0.0);

  const auto twelve = scan_modes(kBase, kLogistic, 12);
  CHECK(twelve.i_c == 11);
  CHECK(twelve.mode(12).sigma_j < 0.0);

  const auto dflt = scan_modes(kBase, kLogistic);
  CHECK(default_mode_window(kBase, kLogistic) == 28);
  CHECK(dflt.modes.size() == 28);
  CHECK(dflt.i_a == 6);
}

TEST_CASE("mode scan errors") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of([] { scan_modes(kBase, kLogistic, 5); }) == ErrorCode::ScanWindowTooSmall);
  CHECK(code_of([] { scan_modes(kBase, kLogistic, 0); }) == ErrorCode::InvalidArgument);
  // Short domain: the first grid mode is already past the band.
  const ModelParams tiny{1.0, 0.0, 1.0};
  CHECK(code_of([&] { scan_modes(tiny, kLogistic, 10); }) == ErrorCode::NoBifurcation);
}

TEST_CASE("i_a tie goes to the smaller mode") {
  // With l = pi the grid lambdas are j^2; choose r so that sigma(1) = sigma(2).
  // sigma(lam) = -(b/(1+lam) + 1) lam with r(1) = 1, r'(1) = b: equal at lam 1 and 4
  // when b = -10.
  const ModelParams p{1.0, 0.0, std::numbers::pi};
  const auto m = exponential_with(-10.0);
  const auto s = scan_modes(p, m, 20);
  CHECK(s.mode(1).sigma_j == doctest::Approx(s.mode(2).sigma_j).epsilon(1e-12));
  CHECK(s.i_a == 1);
}

TEST_CASE("classification of the uniform state") {
  SUBCASE("large sigma") {
    ModelParams p = kBase;
    p.sigma = 0.6;
    const auto c = classify_uniform_state(p, kLogistic);
    CHECK(c.verdict == UniformStability::StableByLargeSigma);
    CHECK(c.unstable_modes.empty());
    CHECK(c.max_growth < 0.0);
  }
  SUBCASE("unstable with mode 6") {
    ModelParams p = kBase;
    p.sigma = 0.3;
    const auto c = classify_uniform_state(p, kLogistic);
    CHECK(c.verdict == UniformStability::Unstable);
    CHECK(std::find(c.unstable_modes.begin(), c.unstable_modes.end(), 6) != c.unstable_modes.end());
    CHECK(c.max_growth > 0.0);
  }
  SUBCASE("monotonicity") {
    ModelParams p = kBase;
    p.sigma = 0.01;
    CHECK(classify_uniform_state(p, exponential_with(-1.0)).verdict ==
          UniformStability::StableByMonotonicity);
    CHECK(classify_uniform_state(p, MotilityModel::exponential(1.0, 0.2)).verdict ==
          UniformStability::StableByMonotonicity);
  }
  SUBCASE("window between sigma_a and sigma_c") {
    ModelParams p = kBase;
    p.sigma = 0.498;
    const auto c = classify_uniform_state(p, kLogistic);
    CHECK(c.verdict == UniformStability::Indeterminate);
    CHECK(c.unstable_modes.empty());
  }
  SUBCASE("sigma D above -(r'+r)") {
    ModelParams p = kBase;
    p.sigma = 1.6;
    CHECK(classify_uniform_state(p, kLogistic).verdict == UniformStability::StableByLargeSigma);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ModelParams{0.0, 0.1, 20}.validate()), Error);
  CHECK_THROWS_AS((ModelParams{1.0, -0.1, 20}.validate()), Error);
  CHECK_THROWS_AS((ModelParams{1.0, 0.1, 0.0}.validate()), Error);
  CHECK_NOTHROW((ModelParams{1.0, 0.0, 20}.validate()));
}
