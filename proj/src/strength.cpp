#include "cumdamage/strength.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cumdamage/error.hpp"

namespace cumdamage {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(what) + " must be a positive finite number", what);
  }
}

}  // namespace

ConstantStrength::ConstantStrength(double K) : K(K) { require_positive(K, "K"); }

LinearStrength::LinearStrength(double a, double b) : a(a), b(b) {
  require_positive(a, "a");
  require_positive(b, "b");
}

ExponentialDecayStrength::ExponentialDecayStrength(double A, double B) : A(A), B(B) {
  require_positive(A, "A");
  require_positive(B, "B");
}

double strength_at(const StrengthCurve& curve, double t) {
  return std::visit(overloaded{
                        [](const ConstantStrength& c) { return c.K; },
                        [&](const LinearStrength& c) { return std::max(c.a - c.b * t, 0.0); },
                        [&](const ExponentialDecayStrength& c) { return c.A * std::exp(-c.B * t); },
                    },
                    curve);
}

std::optional<double> crossing_time(const StrengthCurve& curve, double level) {
  if (level >= initial_strength(curve)) return 0.0;
  return std::visit(
      overloaded{
          [](const ConstantStrength&) -> std::optional<double> { return std::nullopt; },
          [&](const LinearStrength& c) -> std::optional<double> {
            return (c.a - std::max(level, 0.0)) / c.b;
          },
          [&](const ExponentialDecayStrength& c) -> std::optional<double> {
            if (level <= 0.0) return std::nullopt;
            return std::log(c.A / level) / c.B;
          },
      },
      curve);
}

double z_horizon(const StrengthCurve& curve, double Z) {
  if (Z > initial_strength(curve)) {
    throw InvalidLevelError("damage level exceeds the initial strength", "Z");
  }
  return crossing_time(curve, Z).value_or(kInf);
}

double zero_time(const StrengthCurve& curve) {
  if (const auto* linear = std::get_if<LinearStrength>(&curve)) return linear->a / linear->b;
  return kInf;
}

double modified_level(const StrengthCurve& curve, double Z, double t) {
  return std::min(Z, strength_at(curve, t));
}

std::string kind_name(const StrengthCurve& curve) {
  static constexpr const char* names[] = {"constant", "linear", "exponential_decay"};
  return names[curve.index()];
}

}  // namespace cumdamage
