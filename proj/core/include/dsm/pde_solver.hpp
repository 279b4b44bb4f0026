#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dsm/field.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/motility.hpp"

namespace dsm {

struct StepResult {
  Field field;
  double dt = 0.0;
  /// The input was the extinction state (0, 0), an exact but unstable equilibrium.
  bool trivial_state = false;
};

/// Explicit stability bound 0.4 h^2 / max_i r(v_i).
double stable_time_step(const Field& f, const MotilityModel& m);

/// One IMEX step of
///   u_t = (r(v) u)_xx + sigma u (1 - u),   v_t = D v_xx - v + u
/// with zero-flux ghost nodes. The motility flux and reactions are explicit,
/// D v_xx - v is backward Euler. Requires dt <= stable_time_step(f, m).
/// Throws PositivityLoss if a component becomes nonpositive and BlowUp if the
/// max-norm exceeds b_max.
StepResult step(const Field& f, const ModelParams& p, const MotilityModel& m, double dt,
                double b_max = 100.0);

struct StationaryResidual {
  double u = 0.0;
  double v = 0.0;
};

/// Max-norm of the discrete stationary equations at every node.
StationaryResidual stationary_residual(const Field& f, const ModelParams& p,
                                       const MotilityModel& m);

struct ModalSpectrum {
  /// Projection coefficients of u - mean(u) onto cos(pi j x / l), j = 0..n/2.
  std::vector<double> coefficients;
  int dominant = 0;

  double dominant_coefficient() const {
    return coefficients.empty() ? 0.0 : coefficients[static_cast<std::size_t>(dominant)];
  }
};

ModalSpectrum modal_spectrum(const Field& f);

/// Single projection coefficient of u - mean(u) onto cos(pi j x / l).
double mode_coefficient(const Field& f, int j);

/// Interior maxima of u with topographic prominence above the threshold count
/// 1, boundary maxima count 1/2.
double count_peaks(const Field& f, double prominence);

/// Uses 10% of (max u - min u) as the prominence threshold.
double count_peaks(const Field& f);

struct UniformPerturbed {
  double amplitude = 1e-2;
  std::uint64_t seed = 0;
};

/// Second-order asymptotic pattern of mode j with the leading u-amplitude
/// scaled by u1_scale.
struct AsymptoticMode {
  int j = 6;
  double epsilon = 0.01;
  double u1_scale = 1.0;
};

struct ExplicitField {
  Field field;
};

using InitialCondition = std::variant<UniformPerturbed, AsymptoticMode, ExplicitField>;

/// Seeded random cosine series added to both components of any initial
/// condition: sum over m = 1..modes of c_m cos(pi m x / l) with c_m uniform in
/// [-amplitude, amplitude]. It is the same function of x on every grid with
/// n >= modes. With mirror set only even m contribute, so the noise is
/// symmetric about x = l/2.
struct Perturbation {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  bool mirror = false;
  int modes = 32;
};

struct SimConfig {
  ModelParams params;
  MotilityModel motility;
  int n = 512;
  std::optional<double> dt;  // empty: adaptive, always at the stability bound
  double t_end = 5000.0;
  double steady_tol = 1e-8;
  double snapshot_every = 1.0;
  double b_max = 100.0;
  bool keep_snapshots = true;
  /// A challenger mode whose coefficient reaches this fraction of the
  /// incumbent's marks the onset of a transition.
  double onset_ratio = 0.1;
  /// Relative change per unit time below which a new dominant mode counts as settled.
  double settle_rate = 0.01;
  InitialCondition init = UniformPerturbed{};
  Perturbation noise;

  void validate() const;
};

Field make_initial_field(const SimConfig& cfg);

struct Snapshot {
  double t = 0.0;
  Field field;
};

struct ModalRecord {
  double t = 0.0;
  int dominant = 0;
  double peaks = 0.0;
  std::vector<double> coefficients;
};

struct ModeTransition {
  int from = 0;
  int to = 0;
  double t_onset = 0.0;
  double t_cross = 0.0;
  std::optional<double> t_settled;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<ModalRecord> history;
  std::vector<ModeTransition> events;
  Field final;
  double t_final = 0.0;
  long steps = 0;
  bool steady = false;
  bool t_end_reached = false;
};

using SnapshotObserver = std::function<void(double t, const Field& f)>;

/// Integrates until steady (max |du|/dt and max |dv|/dt below steady_tol) or t_end.
/// Snapshots fall exactly on multiples of snapshot_every, plus the final state.
Trajectory simulate(const SimConfig& cfg, const SnapshotObserver& observer = {});

/// Dominant-mode changes in a modal history, with onset and settling times.
std::vector<ModeTransition> detect_transitions(std::span<const ModalRecord> history,
                                               double onset_ratio, double settle_rate);

}  // namespace dsm
