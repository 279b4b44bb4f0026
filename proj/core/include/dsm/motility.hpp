#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace dsm {

/// r(v) = 1 / (1 + exp(steepness * (v - center)))
struct LogisticDecay {
  double steepness = 8.0;
  double center = 1.0;
};

/// r(v) = r0 * exp(-rate * v)
struct ExponentialDecay {
  double r0 = 1.0;
  double rate = 1.0;
};

/// Arbitrary evaluator; derivatives come from Richardson-extrapolated central
/// differences, so the function must be smooth near the evaluation point.
struct CustomMotility {
  std::function<double(double)> eval;
  std::string label = "custom";
};

using MotilityFamily = std::variant<LogisticDecay, ExponentialDecay, CustomMotility>;

/// Signal-dependent motility r(v) with derivatives up to third order.
///
/// Immutable after construction; safe to share across threads as long as a
/// custom evaluator is itself thread-safe.
class MotilityModel {
 public:
  /// The logistic r(v) = 1 / (1 + exp(8 (v - 1))).
  MotilityModel();
  explicit MotilityModel(MotilityFamily family);

  static MotilityModel logistic(double steepness, double center);
  static MotilityModel exponential(double r0, double rate);
  static MotilityModel custom(std::function<double(double)> eval, std::string label = "custom");

  /// order-th derivative of r at v, order in 0..3.
  double eval(double v, int order = 0) const;

  double r(double v) const { return eval(v, 0); }
  double dr(double v) const { return eval(v, 1); }

  const MotilityFamily& family() const noexcept { return family_; }
  std::string describe() const;

 private:
  double custom_derivative(const CustomMotility& c, double v, int order) const;

  MotilityFamily family_;
};

/// Taylor data of r at the uniform state v = 1.
struct MotilityTaylor {
  double r0;  // r(1)
  double r1;  // r'(1)
  double r2;  // r''(1)
  double r3;  // r'''(1)
};

MotilityTaylor taylor_at_unity(const MotilityModel& m);

struct ConditionViolation {
  double v;
  std::string what;
};

struct MotilityReport {
  bool ok = true;
  std::optional<ConditionViolation> violation;
  /// r'(1) + r(1); negative values open an instability window.
  double slope_sum_at_unity = 0.0;
  bool instability_possible = false;
};

/// Samples r > 0 and r' < 0 on [0, v_max] at n_samples equispaced points.
MotilityReport check_motility_conditions(const MotilityModel& m, double v_max = 10.0,
                                         int n_samples = 1000);

}  // namespace dsm
