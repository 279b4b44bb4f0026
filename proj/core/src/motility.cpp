#include "dsm/motility.hpp"

#include <cmath>
#include <sstream>

#include "dsm/errors.hpp"

namespace dsm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double logistic_derivative(const LogisticDecay& f, double v, int order) {
  const double x = f.steepness * (v - f.center);
  // s = 1/(1+e^x) and its complement, each evaluated on the non-overflowing side.
  const double s = 1.0 / (1.0 + std::exp(x));
  const double sc = 1.0 / (1.0 + std::exp(-x));
  const double q = s * sc;
  const double k = f.steepness;
  switch (order) {
    case 0: return s;
    case 1: return -k * q;
    case 2: return k * k * (sc - s) * q;
    case 3: {
      const double w = sc - s;
      return k * k * k * (2.0 * q * q - w * w * q);
    }
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "derivative order must be in 0..3");
}

double exponential_derivative(const ExponentialDecay& f, double v, int order) {
  const double base = f.r0 * std::exp(-f.rate * v);
  switch (order) {
    case 0: return base;
    case 1: return -f.rate * base;
    case 2: return f.rate * f.rate * base;
    case 3: return -f.rate * f.rate * f.rate * base;
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "derivative order must be in 0..3");
}

double checked_call(const CustomMotility& c, double v) {
  double value = 0.0;
  try {
    value = c.eval(v);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::EvaluationError,
                c.label + " evaluator failed at v=" + std::to_string(v) + ": " + e.what());
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::EvaluationError,
                c.label + " evaluator returned a non-finite value at v=" + std::to_string(v));
  }
  return value;
}

// Five-point central stencils. First and second derivative stencils are
// fourth order; the third derivative stencil is second order.
double stencil(const CustomMotility& c, double v, double h, int order) {
  const double fm2 = checked_call(c, v - 2.0 * h);
  const double fm1 = checked_call(c, v - h);
  const double fp1 = checked_call(c, v + h);
  const double fp2 = checked_call(c, v + 2.0 * h);
  switch (order) {
    case 1: return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    case 2: {
      const double f0 = checked_call(c, v);
      return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    }
    default: return (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
  }
}

}  // namespace

MotilityModel::MotilityModel() : family_(LogisticDecay{8.0, 1.0}) {}

MotilityModel::MotilityModel(MotilityFamily family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const LogisticDecay& f) {
                   if (!(f.steepness > 0.0) || !std::isfinite(f.center)) {
                     throw Error(ErrorCode::InvalidArgument,
                                 "logistic motility needs steepness > 0 and a finite center");
                   }
                 },
                 [](const ExponentialDecay& f) {
                   if (!(f.r0 > 0.0) || !(f.rate > 0.0)) {
                     throw Error(ErrorCode::InvalidArgument,
                                 "exponential motility needs r0 > 0 and rate > 0");
                   }
                 },
                 [](const CustomMotility& f) {
                   if (!f.eval) {
                     throw Error(ErrorCode::InvalidArgument, "custom motility has no evaluator");
                   }
                 },
             },
             family_);
}

MotilityModel MotilityModel::logistic(double steepness, double center) {
  return MotilityModel(LogisticDecay{steepness, center});
}

MotilityModel MotilityModel::exponential(double r0, double rate) {
  return MotilityModel(ExponentialDecay{r0, rate});
}

MotilityModel MotilityModel::custom(std::function<double(double)> eval, std::string label) {
  return MotilityModel(CustomMotility{std::move(eval), std::move(label)});
}

double MotilityModel::eval(double v, int order) const {
  if (order < 0 || order > 3) {
    throw Error(ErrorCode::InvalidArgument, "derivative order must be in 0..3");
  }
  return std::visit(overloaded{
                        [&](const LogisticDecay& f) { return logistic_derivative(f, v, order); },
                        [&](const ExponentialDecay& f) {
                          return exponential_derivative(f, v, order);
                        },
                        [&](const CustomMotility& f) {
                          return order == 0 ? checked_call(f, v) : custom_derivative(f, v, order);
                        },
                    },
                    family_);
}

double MotilityModel::custom_derivative(const CustomMotility& c, double v, int order) const {
  // Higher orders lose more digits to cancellation, so the base step grows with the order.
  static constexpr double base_step[] = {0.0, 1e-4, 1e-3, 5e-3};
  const double h = base_step[order] * std::max(1.0, std::abs(v));
  const double coarse = stencil(c, v, h, order);
  const double fine = stencil(c, v, 0.5 * h, order);
  const double ratio = order == 3 ? 4.0 : 16.0;
  return (ratio * fine - coarse) / (ratio - 1.0);
}

std::string MotilityModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const LogisticDecay& f) {
                   os << "logistic(steepness=" << f.steepness << ", center=" << f.center << ")";
                 },
                 [&](const ExponentialDecay& f) {
                   os << "exponential(r0=" << f.r0 << ", rate=" << f.rate << ")";
                 },
                 [&](const CustomMotility& f) { os << f.label; },
             },
             family_);
  return os.str();
}

MotilityTaylor taylor_at_unity(const MotilityModel& m) {
  return {m.eval(1.0, 0), m.eval(1.0, 1), m.eval(1.0, 2), m.eval(1.0, 3)};
}

MotilityReport check_motility_conditions(const MotilityModel& m, double v_max, int n_samples) {
  if (!(v_max > 0.0) || n_samples < 2) {
    throw Error(ErrorCode::InvalidArgument, "need v_max > 0 and at least two samples");
  }
  MotilityReport report;
  for (int i = 0; i < n_samples && report.ok; ++i) {
    const double v = v_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    if (!(m.eval(v, 0) > 0.0)) {
      report.ok = false;
      report.violation = ConditionViolation{v, "r(v) > 0"};
    } else if (!(m.eval(v, 1) < 0.0)) {
      report.ok = false;
      report.violation = ConditionViolation{v, "r'(v) < 0"};
    }
  }
  report.slope_sum_at_unity = m.eval(1.0, 1) + m.eval(1.0, 0);
  report.instability_possible = report.slope_sum_at_unity < 0.0;
  return report;
}

}  // namespace dsm
