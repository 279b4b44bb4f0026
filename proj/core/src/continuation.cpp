#include "dsm/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsm/asymptotics.hpp"
#include "dsm/banded.hpp"
#include "dsm/errors.hpp"
#include "dsm/pde_solver.hpp"

namespace dsm {

std::string_view to_string(BranchTermination t) noexcept {
  switch (t) {
    case BranchTermination::ReachedSigmaMin: return "ReachedSigmaMin";
    case BranchTermination::AmplitudeBound: return "AmplitudeBound";
    case BranchTermination::NewtonFailure: return "NewtonFailure";
    case BranchTermination::FoldLimit: return "FoldLimit";
  }
  return "NewtonFailure";
}

namespace {

constexpr std::size_t kBand = 3;

std::size_t u_index(std::size_t i) { return 2 * i; }
std::size_t v_index(std::size_t i) { return 2 * i + 1; }

// Weights of the h^2-scaled Laplacian row i on node k.
template <class Fn>
void for_each_laplacian_entry(std::size_t i, std::size_t last, Fn&& fn) {
  if (i == 0) {
    fn(0, -2.0);
    fn(1, 2.0);
  } else if (i == last) {
    fn(last - 1, 2.0);
    fn(last, -2.0);
  } else {
    fn(i - 1, 1.0);
    fn(i, -2.0);
    fn(i + 1, 1.0);
  }
}

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double max_deviation(const Field& f) {
  double a = 0.0;
  for (double u : f.u) a = std::max(a, std::abs(u - 1.0));
  return a;
}

bool inside_box(const Field& f, double b_max) {
  auto ok = [&](double x) { return x >= 1.0 / b_max && x <= b_max; };
  return std::all_of(f.u.begin(), f.u.end(), ok) && std::all_of(f.v.begin(), f.v.end(), ok);
}

std::vector<double> pack(const Field& f) {
  std::vector<double> z(2 * f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    z[u_index(i)] = f.u[i];
    z[v_index(i)] = f.v[i];
  }
  return z;
}

void unpack(std::span<const double> z, Field& f) {
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = z[u_index(i)];
    f.v[i] = z[v_index(i)];
  }
}

// dF/dsigma in the interleaved ordering.
std::vector<double> sigma_derivative(const Field& f) {
  std::vector<double> g(2 * f.u.size(), 0.0);
  for (std::size_t i = 0; i < f.u.size(); ++i) g[u_index(i)] = f.u[i] * (1.0 - f.u[i]);
  return g;
}

/// State on the extended (field, sigma) space with the arclength inner product.
struct State {
  std::vector<double> z;
  double sigma = 0.0;
};

double weighted_dot(const State& a, const State& b) {
  const double theta = 1.0 / static_cast<double>(a.z.size());
  return theta * std::inner_product(a.z.begin(), a.z.end(), b.z.begin(), 0.0) +
         a.sigma * b.sigma;
}

State difference(const State& a, const State& b) {
  State d{std::vector<double>(a.z.size()), a.sigma - b.sigma};
  for (std::size_t i = 0; i < a.z.size(); ++i) d.z[i] = a.z[i] - b.z[i];
  return d;
}

struct CorrectorResult {
  bool converged = false;
  int iters = 0;
  double residual = 0.0;
};

// Newton on F(z, sigma) = 0, <tangent, X - predicted> = 0 by block elimination
// of the bordered system.
CorrectorResult bordered_newton(State& x, const State& tangent, const State& predicted,
                                Field& work, ModelParams p, const MotilityModel& m,
                                double tol, int max_iters) {
  const std::size_t dim = x.z.size();
  const double theta = 1.0 / static_cast<double>(dim);
  BandedMatrix jac(dim, kBand, kBand);
  CorrectorResult out;
  for (int it = 0; it <= max_iters; ++it) {
    unpack(x.z, work);
    p.sigma = x.sigma;
    auto residual = stationary_system(work, p, m);
    out.residual = max_norm(residual);
    out.iters = it;
    if (!std::isfinite(out.residual)) return out;
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
    if (it == max_iters) return out;

    assemble_jacobian(work, p, m, jac);
    try {
      jac.factorize();
    } catch (const Error&) {
      return out;
    }
    // x_F solves J x_F = -F; x_s solves J x_s = dF/dsigma.
    std::vector<double> x_f(residual.size());
    std::transform(residual.begin(), residual.end(), x_f.begin(), [](double r) { return -r; });
    jac.solve(x_f);
    auto x_s = sigma_derivative(work);
    jac.solve(x_s);

    const double g = weighted_dot(tangent, difference(x, predicted));
    double tz_xf = 0.0;
    double tz_xs = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      tz_xf += tangent.z[i] * x_f[i];
      tz_xs += tangent.z[i] * x_s[i];
    }
    const double denom = tangent.sigma - theta * tz_xs;
    if (denom == 0.0 || !std::isfinite(denom)) return out;
    const double dsigma = (-g - theta * tz_xf) / denom;
    for (std::size_t i = 0; i < dim; ++i) x.z[i] += x_f[i] - x_s[i] * dsigma;
    x.sigma += dsigma;
  }
  return out;
}

BranchPoint make_point(const Field& f, double sigma, int iters, double residual) {
  return {sigma, f, max_deviation(f), iters, residual};
}

}  // namespace

std::vector<double> stationary_system(const Field& f, const ModelParams& p,
                                      const MotilityModel& m) {
  const std::size_t count = f.u.size();
  const std::size_t last = count - 1;
  const double inv_h2 = 1.0 / (f.h() * f.h());
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = m.r(f.v[i]) * f.u[i];
  std::vector<double> out(2 * count);
  for (std::size_t i = 0; i < count; ++i) {
    double lap_w = 0.0;
    double lap_v = 0.0;
    for_each_laplacian_entry(i, last, [&](std::size_t k, double c) {
      lap_w += c * w[k];
      lap_v += c * f.v[k];
    });
    const double u = f.u[i];
    out[u_index(i)] = lap_w * inv_h2 + p.sigma * u * (1.0 - u);
    out[v_index(i)] = p.D * lap_v * inv_h2 - f.v[i] + u;
  }
  return out;
}

void assemble_jacobian(const Field& f, const ModelParams& p, const MotilityModel& m,
                       BandedMatrix& jac) {
  const std::size_t count = f.u.size();
  const std::size_t last = count - 1;
  if (jac.size() != 2 * count || jac.lower() < kBand || jac.upper() < kBand) {
    throw Error(ErrorCode::InvalidArgument, "Jacobian storage does not match the field");
  }
  const double inv_h2 = 1.0 / (f.h() * f.h());
  jac.set_zero();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row_u = u_index(i);
    const std::size_t row_v = v_index(i);
    for_each_laplacian_entry(i, last, [&](std::size_t k, double c) {
      const double vk = f.v[k];
      jac(row_u, u_index(k)) += c * inv_h2 * m.r(vk);
      jac(row_u, v_index(k)) += c * inv_h2 * m.dr(vk) * f.u[k];
      jac(row_v, v_index(k)) += c * inv_h2 * p.D;
    });
    jac(row_u, row_u) += p.sigma * (1.0 - 2.0 * f.u[i]);
    jac(row_v, row_v) -= 1.0;
    jac(row_v, row_u) += 1.0;
  }
}

BranchPoint newton_steady(const Field& init, const ModelParams& p, const MotilityModel& m,
                          double tol, int max_iters) {
  p.validate();
  if (!init.all_finite()) throw Error(ErrorCode::InvalidArgument, "initial guess is not finite");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  Field f = init;
  auto z = pack(f);
  BandedMatrix jac(z.size(), kBand, kBand);
  for (int it = 0;; ++it) {
    auto residual = stationary_system(f, p, m);
    const double norm = max_norm(residual);
    if (!std::isfinite(norm)) {
      throw Error(ErrorCode::MaxIterations, "Newton iterate became non-finite");
    }
    if (norm < tol) return make_point(f, p.sigma, it, norm);
    if (it >= max_iters) {
      throw Error(ErrorCode::MaxIterations, "Newton did not converge in " +
                                                std::to_string(max_iters) +
                                                " iterations (residual " +
                                                std::to_string(norm) + ")");
    }
    assemble_jacobian(f, p, m, jac);
    jac.factorize();
    jac.solve(residual);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] -= residual[k];
    unpack(z, f);
  }
}

BranchCurve trace_branch(int j, const ModelParams& p, const MotilityModel& m, double sigma_min,
                         double ds, const ContinuationOptions& opts) {
  p.validate();
  if (!(ds > 0.0)) throw Error(ErrorCode::InvalidArgument, "ds must be positive");
  BranchCurve curve;
  curve.j = j;

  Expansion e;
  try {
    e = expansion_coefficients(j, p, m);
  } catch (const Error& err) {
    throw Error(ErrorCode::SeedFailure, std::string("cannot seed branch: ") + err.what());
  }
  const double sigma_seed = e.sigma0 - opts.delta;
  if (sigma_min >= sigma_seed) {
    curve.termination = BranchTermination::ReachedSigmaMin;
    return curve;
  }

  auto natural_solve = [&](double sigma) {
    ModelParams q = p;
    q.sigma = sigma;
    const double eps = epsilon_for_sigma(e, sigma);
    const Field guess = evaluate_approximate_steady_state(e, eps, opts.n);
    auto point = newton_steady(guess, q, m, opts.newton_tol, opts.max_iters);
    if (point.amplitude < 0.1 * eps * e.a) {
      throw Error(ErrorCode::SeedFailure, "Newton fell back onto the uniform state");
    }
    return point;
  };

  BranchPoint first;
  try {
    first = natural_solve(sigma_seed);
  } catch (const Error& err) {
    throw Error(ErrorCode::SeedFailure, std::string("seed solve failed: ") + err.what());
  }
  curve.points.push_back(first);

  const double sigma_second = std::max(sigma_seed - ds, sigma_min);
  try {
    curve.points.push_back(natural_solve(sigma_second));
  } catch (const Error&) {
    curve.termination = BranchTermination::NewtonFailure;
    return curve;
  }
  if (sigma_second <= sigma_min) {
    curve.termination = BranchTermination::ReachedSigmaMin;
    return curve;
  }

  Field work = first.field;
  double step = ds;
  while (static_cast<int>(curve.points.size()) < opts.max_points) {
    const auto& prev = curve.points[curve.points.size() - 2];
    const auto& last = curve.points.back();
    State x_prev{pack(prev.field), prev.sigma};
    State x_last{pack(last.field), last.sigma};
    State tangent = difference(x_last, x_prev);
    const double norm = std::sqrt(weighted_dot(tangent, tangent));
    for (double& t : tangent.z) t /= norm;
    tangent.sigma /= norm;

    bool accepted = false;
    State x;
    CorrectorResult corr;
    while (step >= opts.ds_min) {
      State predicted = x_last;
      for (std::size_t i = 0; i < predicted.z.size(); ++i) predicted.z[i] += step * tangent.z[i];
      predicted.sigma += step * tangent.sigma;
      x = predicted;
      corr = bordered_newton(x, tangent, predicted, work, p, m, opts.newton_tol,
                             opts.max_iters);
      if (corr.converged) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      curve.termination = BranchTermination::NewtonFailure;
      return curve;
    }

    unpack(x.z, work);
    if (!inside_box(work, opts.b_max)) {
      curve.termination = BranchTermination::AmplitudeBound;
      return curve;
    }
    if (x.sigma <= sigma_min) {
      // Land exactly on sigma_min, starting from the linear interpolant.
      const double s = (last.sigma - sigma_min) / (last.sigma - x.sigma);
      Field guess = last.field;
      for (std::size_t i = 0; i < guess.u.size(); ++i) {
        guess.u[i] += s * (work.u[i] - guess.u[i]);
        guess.v[i] += s * (work.v[i] - guess.v[i]);
      }
      ModelParams q = p;
      q.sigma = sigma_min;
      try {
        curve.points.push_back(newton_steady(guess, q, m, opts.newton_tol, opts.max_iters));
        curve.termination = BranchTermination::ReachedSigmaMin;
      } catch (const Error&) {
        curve.termination = BranchTermination::NewtonFailure;
      }
      return curve;
    }
    const bool folded = x.sigma > last.sigma;
    curve.points.push_back(make_point(work, x.sigma, corr.iters, corr.residual));
    if (folded) {
      curve.termination = BranchTermination::FoldLimit;
      return curve;
    }
    if (corr.iters <= 3) step = std::min(2.0 * step, opts.ds_max);
  }
  curve.termination = BranchTermination::NewtonFailure;
  return curve;
}

}  // namespace dsm
