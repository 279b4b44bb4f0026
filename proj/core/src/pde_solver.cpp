#include "dsm/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dsm/asymptotics.hpp"
#include "dsm/errors.hpp"

namespace dsm {
namespace {

// Three-point Laplacian times h^2 with mirror ghost nodes. Neighbour sums are
// formed before subtracting so that the result is bitwise reflection-symmetric.
inline double laplacian_h2(std::span<const double> w, std::size_t i, std::size_t last) {
  if (i == 0) return 2.0 * (w[1] - w[0]);
  if (i == last) return 2.0 * (w[last - 1] - w[last]);
  return (w[i + 1] + w[i - 1]) - 2.0 * w[i];
}

/// Solves (1 + diag) x_i - alpha * lap_h2(x)_i = rhs_i with the mirror
/// boundary rows, eliminating from both ends towards the middle node so that
/// symmetric right-hand sides give bitwise symmetric solutions.
class MirrorTridiagonal {
 public:
  void solve(double alpha, double diag, std::span<const double> rhs, std::span<double> x) {
    const std::size_t last = rhs.size() - 1;
    const std::size_t mid = last / 2;
    cl_.resize(rhs.size());
    dl_.resize(rhs.size());
    cr_.resize(rhs.size());
    dr_.resize(rhs.size());
    const double b = diag + 2.0 * alpha;

    // Left part: x_i = dl_i - cl_i x_{i+1}.
    cl_[0] = -2.0 * alpha / b;
    dl_[0] = rhs[0] / b;
    for (std::size_t i = 1; i < mid; ++i) {
      const double piv = b + alpha * cl_[i - 1];
      cl_[i] = -alpha / piv;
      dl_[i] = (rhs[i] + alpha * dl_[i - 1]) / piv;
    }
    // Right part: x_i = dr_i - cr_i x_{i-1}.
    cr_[last] = -2.0 * alpha / b;
    dr_[last] = rhs[last] / b;
    for (std::size_t i = last - 1; i > mid; --i) {
      const double piv = b + alpha * cr_[i + 1];
      cr_[i] = -alpha / piv;
      dr_[i] = (rhs[i] + alpha * dr_[i + 1]) / piv;
    }
    // Middle row couples both sweeps.
    if (mid == 0) {
      // Two nodes only cannot happen (Field needs n >= 2), so mid >= 1.
      x[0] = dl_[0];
      return;
    }
    const double centre = (rhs[mid] + alpha * (dl_[mid - 1] + dr_[mid + 1])) /
                          (b + alpha * (cl_[mid - 1] + cr_[mid + 1]));
    x[mid] = centre;
    for (std::size_t i = mid; i-- > 0;) x[i] = dl_[i] - cl_[i] * x[i + 1];
    for (std::size_t i = mid + 1; i <= last; ++i) x[i] = dr_[i] - cr_[i] * x[i - 1];
  }

 private:
  std::vector<double> cl_, dl_, cr_, dr_;
};

class Integrator {
 public:
  Integrator(const ModelParams& p, const MotilityModel& m, double b_max)
      : p_(p), m_(m), b_max_(b_max) {}

  // Caches r(v) u for the next advance() and returns the explicit bound.
  double prepare(const Field& f) {
    compute_flux(f);
    return bound_from_rmax(f);
  }

  struct Change {
    double du = 0.0;
    double dv = 0.0;
  };

  // Advances f in place. prepare() must have been called on the current f.
  Change advance(Field& f, double dt) {
    const std::size_t count = f.u.size();
    const std::size_t last = count - 1;
    const double h = f.h();
    const double inv_h2 = 1.0 / (h * h);

    du_.resize(count);
    rhs_.resize(count);
    dv_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = f.u[i];
      du_[i] = dt * (laplacian_h2(w_, i, last) * inv_h2 + p_.sigma * u * (1.0 - u));
      rhs_[i] = dt * (p_.D * laplacian_h2(f.v, i, last) * inv_h2 - f.v[i] + u);
    }
    // Increment form keeps uniform equilibria exact.
    tri_.solve(dt * p_.D * inv_h2, 1.0 + dt, rhs_, dv_);

    Change change;
    for (std::size_t i = 0; i < count; ++i) {
      f.u[i] += du_[i];
      f.v[i] += dv_[i];
      change.du = std::max(change.du, std::abs(du_[i]));
      change.dv = std::max(change.dv, std::abs(dv_[i]));
    }
    check(f);
    return change;
  }

 private:
  void compute_flux(const Field& f) {
    w_.resize(f.u.size());
    rmax_ = 0.0;
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      const double r = m_.r(f.v[i]);
      rmax_ = std::max(rmax_, r);
      w_[i] = r * f.u[i];
    }
  }

  double bound_from_rmax(const Field& f) const {
    const double h = f.h();
    return rmax_ > 0.0 ? 0.4 * h * h / rmax_ : std::numeric_limits<double>::infinity();
  }

  void check(const Field& f) const {
    double norm = 0.0;
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      const double u = f.u[i];
      const double v = f.v[i];
      if (!std::isfinite(u) || !std::isfinite(v)) {
        throw Error(ErrorCode::BlowUp, "non-finite value at node " + std::to_string(i));
      }
      if (!(u > 0.0) || !(v > 0.0)) {
        throw Error(ErrorCode::PositivityLoss,
                    "nonpositive density at node " + std::to_string(i));
      }
      norm = std::max({norm, u, v});
    }
    if (norm > b_max_) {
      throw Error(ErrorCode::BlowUp, "max-norm " + std::to_string(norm) + " exceeds bound");
    }
  }

  ModelParams p_;
  const MotilityModel& m_;
  double b_max_;
  double rmax_ = 0.0;
  std::vector<double> w_, du_, rhs_, dv_;
  MirrorTridiagonal tri_;
};

bool is_extinct(const Field& f) {
  auto zero = [](double x) { return x == 0.0; };
  return std::all_of(f.u.begin(), f.u.end(), zero) && std::all_of(f.v.begin(), f.v.end(), zero);
}

// cos(pi q / n) for q in [0, 2n); entry (j i) mod 2n equals grid_cosine(j, i, n).
std::vector<double> cosine_ring(int n) {
  std::vector<double> ring(2 * static_cast<std::size_t>(n));
  for (long q = 0; q < 2L * n; ++q) ring[static_cast<std::size_t>(q)] = grid_cosine(1, q, n);
  return ring;
}

ModalSpectrum spectrum_with_ring(const Field& f, std::span<const double> ring) {
  const int n = f.n();
  const long period = 2L * n;
  const double mean = trapezoid_mean(f.u);
  ModalSpectrum out;
  out.coefficients.assign(static_cast<std::size_t>(n / 2 + 1), 0.0);
  double best = 0.0;
  for (int j = 1; j <= n / 2; ++j) {
    double sum = 0.0;
    long q = 0;
    for (int i = 0; i <= n; ++i) {
      const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
      sum += weight * (f.u[static_cast<std::size_t>(i)] - mean) * ring[static_cast<std::size_t>(q)];
      q += j;
      if (q >= period) q -= period;
    }
    const double coef = 2.0 * sum / static_cast<double>(n);
    out.coefficients[static_cast<std::size_t>(j)] = coef;
    if (std::abs(coef) > best) {
      best = std::abs(coef);
      out.dominant = j;
    }
  }
  return out;
}

}  // namespace

double stable_time_step(const Field& f, const MotilityModel& m) {
  Integrator integrator(ModelParams{}, m, std::numeric_limits<double>::infinity());
  return integrator.prepare(f);
}

StepResult step(const Field& f, const ModelParams& p, const MotilityModel& m, double dt,
                double b_max) {
  p.validate();
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  StepResult out{f, dt, false};
  if (is_extinct(f)) {
    out.trivial_state = true;
    return out;
  }
  Integrator integrator(p, m, b_max);
  const double bound = integrator.prepare(f);
  if (dt > bound * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument,
                "dt=" + std::to_string(dt) + " exceeds the stability bound " +
                    std::to_string(bound));
  }
  integrator.advance(out.field, dt);
  return out;
}

StationaryResidual stationary_residual(const Field& f, const ModelParams& p,
                                       const MotilityModel& m) {
  const std::size_t count = f.u.size();
  const std::size_t last = count - 1;
  const double inv_h2 = 1.0 / (f.h() * f.h());
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = m.r(f.v[i]) * f.u[i];
  StationaryResidual res;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = f.u[i];
    const double fu = laplacian_h2(w, i, last) * inv_h2 + p.sigma * u * (1.0 - u);
    const double fv = p.D * laplacian_h2(f.v, i, last) * inv_h2 - f.v[i] + u;
    res.u = std::max(res.u, std::abs(fu));
    res.v = std::max(res.v, std::abs(fv));
  }
  return res;
}

ModalSpectrum modal_spectrum(const Field& f) {
  const auto ring = cosine_ring(f.n());
  return spectrum_with_ring(f, ring);
}

double mode_coefficient(const Field& f, int j) {
  const int n = f.n();
  if (j < 0 || j > n) throw Error(ErrorCode::InvalidArgument, "mode index outside the grid");
  const double mean = trapezoid_mean(f.u);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += weight * (f.u[static_cast<std::size_t>(i)] - mean) * grid_cosine(j, i, n);
  }
  return 2.0 * sum / static_cast<double>(n);
}

double count_peaks(const Field& f, double prominence) {
  if (!(prominence > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "prominence must be positive");
  }
  const auto& u = f.u;
  const long n = f.n();
  const long period = 2 * n;
  // Even extension about both boundaries turns boundary maxima into interior ones.
  auto at = [&](long q) {
    q %= period;
    if (q < 0) q += period;
    if (q > n) q = period - q;
    return u[static_cast<std::size_t>(q)];
  };

  double count = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double peak = at(i);
    if (!(peak > at(i - 1) && peak > at(i + 1))) continue;
    double left_min = peak;
    for (long q = i - 1; q > i - period; --q) {
      const double value = at(q);
      if (value > peak) break;
      left_min = std::min(left_min, value);
    }
    double right_min = peak;
    for (long q = i + 1; q < i + period; ++q) {
      const double value = at(q);
      if (value > peak) break;
      right_min = std::min(right_min, value);
    }
    if (peak - std::max(left_min, right_min) > prominence) {
      count += (i == 0 || i == n) ? 0.5 : 1.0;
    }
  }
  return count;
}

double count_peaks(const Field& f) {
  const auto [lo, hi] = std::minmax_element(f.u.begin(), f.u.end());
  const double range = *hi - *lo;
  if (!(range > 1e-14 * std::max(1.0, std::abs(*hi)))) return 0.0;
  return count_peaks(f, 0.1 * range);
}

void SimConfig::validate() const {
  params.validate();
  if (n < 16) throw Error(ErrorCode::InvalidArgument, "resolution n must be at least 16");
  if (dt && !(*dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  if (!(steady_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "steady_tol must be positive");
  if (!(snapshot_every > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "snapshot cadence must be positive");
  }
  if (!(b_max > 1.0)) throw Error(ErrorCode::InvalidArgument, "b_max must exceed 1");
  if (!(noise.amplitude >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise amplitude must be nonnegative");
  }
  if (noise.modes < 1) {
    throw Error(ErrorCode::InvalidArgument, "noise needs at least one mode");
  }
  if (const auto* e = std::get_if<ExplicitField>(&init)) {
    if (e->field.n() != n || e->field.l != params.l) {
      throw Error(ErrorCode::InvalidArgument, "explicit initial field does not match the grid");
    }
  }
}

namespace {

Field base_initial_field(const SimConfig& cfg) {
  if (const auto* pert = std::get_if<UniformPerturbed>(&cfg.init)) {
    Field f(cfg.n, cfg.params.l);
    std::mt19937_64 rng(pert->seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      f.u[i] = 1.0 + pert->amplitude * unit(rng);
      f.v[i] = 1.0 + pert->amplitude * unit(rng);
    }
    return f;
  }
  if (const auto* mode = std::get_if<AsymptoticMode>(&cfg.init)) {
    const auto e = expansion_coefficients(mode->j, cfg.params, cfg.motility);
    return evaluate_approximate_steady_state(e, mode->epsilon, cfg.n, mode->u1_scale);
  }
  return std::get<ExplicitField>(cfg.init).field;
}

}  // namespace

Field make_initial_field(const SimConfig& cfg) {
  cfg.validate();
  Field f = base_initial_field(cfg);
  const auto& noise = cfg.noise;
  if (noise.amplitude > 0.0) {
    // Same function of x on every grid; odd modes are dropped for mirror noise.
    std::mt19937_64 rng(noise.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const long n = f.n();
    for (int m = 1; m <= noise.modes; ++m) {
      const double cu = noise.amplitude * unit(rng);
      const double cv = noise.amplitude * unit(rng);
      if (noise.mirror && m % 2 == 1) continue;
      for (long i = 0; i <= n; ++i) {
        const double c = grid_cosine(m, i, n);
        f.u[static_cast<std::size_t>(i)] += cu * c;
        f.v[static_cast<std::size_t>(i)] += cv * c;
      }
    }
    if (!f.all_positive()) {
      throw Error(ErrorCode::InvalidArgument, "initial noise makes the field nonpositive");
    }
  }
  return f;
}

std::vector<ModeTransition> detect_transitions(std::span<const ModalRecord> history,
                                               double onset_ratio, double settle_rate) {
  std::vector<ModeTransition> out;
  auto coef = [&](std::size_t k, int j) {
    const auto& c = history[k].coefficients;
    return static_cast<std::size_t>(j) < c.size() ? std::abs(c[static_cast<std::size_t>(j)])
                                                  : 0.0;
  };
  for (std::size_t k = 1; k < history.size(); ++k) {
    const int from = history[k - 1].dominant;
    const int to = history[k].dominant;
    if (from == to) continue;
    ModeTransition tr;
    tr.from = from;
    tr.to = to;
    tr.t_cross = history[k].t;
    std::size_t first = k;
    while (first > 0 && coef(first - 1, to) >= onset_ratio * coef(first - 1, from)) --first;
    tr.t_onset = history[first].t;
    for (std::size_t m = k; m + 1 < history.size(); ++m) {
      if (history[m + 1].dominant != to) break;
      const double now = coef(m, to);
      const double dt = history[m + 1].t - history[m].t;
      if (now > 0.0 && dt > 0.0 && std::abs(coef(m + 1, to) - now) / (now * dt) < settle_rate) {
        tr.t_settled = history[m].t;
        break;
      }
    }
    out.push_back(tr);
  }
  return out;
}

Trajectory simulate(const SimConfig& cfg, const SnapshotObserver& observer) {
  cfg.validate();
  Field f = make_initial_field(cfg);
  const auto ring = cosine_ring(f.n());
  Integrator integrator(cfg.params, cfg.motility, cfg.b_max);

  Trajectory traj;
  double t = 0.0;
  double last_recorded = -1.0;
  auto record = [&](double time) {
    auto spectrum = spectrum_with_ring(f, ring);
    ModalRecord rec;
    rec.t = time;
    rec.dominant = spectrum.dominant;
    rec.peaks = count_peaks(f);
    rec.coefficients = std::move(spectrum.coefficients);
    traj.history.push_back(std::move(rec));
    if (cfg.keep_snapshots) traj.snapshots.push_back({time, f});
    if (observer) observer(time, f);
    last_recorded = time;
  };

  record(0.0);
  if (!is_extinct(f)) {
    long snapshot_index = 1;
    double next_snapshot = cfg.snapshot_every;
    while (t < cfg.t_end) {
      double dt = integrator.prepare(f);
      if (cfg.dt) dt = std::min(dt, *cfg.dt);
      dt = std::min({dt, next_snapshot - t, cfg.t_end - t});
      const auto change = integrator.advance(f, dt);
      ++traj.steps;
      // Land exactly on snapshot times instead of accumulating rounding.
      const bool hit_snapshot = next_snapshot - (t + dt) <= 1e-12 * std::max(1.0, next_snapshot);
      t = hit_snapshot ? next_snapshot : t + dt;
      if (hit_snapshot) {
        record(t);
        ++snapshot_index;
        next_snapshot = cfg.snapshot_every * static_cast<double>(snapshot_index);
      }
      if (change.du / dt < cfg.steady_tol && change.dv / dt < cfg.steady_tol) {
        traj.steady = true;
        break;
      }
    }
  } else {
    traj.steady = true;
  }
  if (last_recorded != t) record(t);
  traj.final = f;
  traj.t_final = t;
  traj.t_end_reached = !traj.steady;
  traj.events = detect_transitions(traj.history, cfg.onset_ratio, cfg.settle_rate);
  return traj;
}

}  // namespace dsm
