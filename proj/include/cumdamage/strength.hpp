#pragma once

#include <optional>
#include <string>
#include <variant>

namespace cumdamage {

struct ConstantStrength {
  double K;
  explicit ConstantStrength(double K);
  bool operator==(const ConstantStrength&) const = default;
};

/// K(t) = max{a - b t, 0}.
struct LinearStrength {
  double a;
  double b;
  LinearStrength(double a, double b);
  bool operator==(const LinearStrength&) const = default;
};

/// K(t) = A exp(-B t).
struct ExponentialDecayStrength {
  double A;
  double B;
  ExponentialDecayStrength(double A, double B);
  bool operator==(const ExponentialDecayStrength&) const = default;
};

/// Deterministic, continuous, non-increasing strength curve.
using StrengthCurve = std::variant<ConstantStrength, LinearStrength, ExponentialDecayStrength>;

double strength_at(const StrengthCurve& curve, double t);

inline double initial_strength(const StrengthCurve& curve) { return strength_at(curve, 0.0); }

/// Smallest t >= 0 with K(t) <= level, or nothing if the curve stays above
/// `level` forever. Solved analytically per variant.
std::optional<double> crossing_time(const StrengthCurve& curve, double level);

/// Time T0 with K(T0) = Z; +infinity when the curve never comes down to Z.
/// Throws InvalidLevelError for Z > K(0).
double z_horizon(const StrengthCurve& curve, double Z);

/// Time at which the strength reaches zero (+infinity unless linear).
double zero_time(const StrengthCurve& curve);

/// min(Z, K(t)): Z up to the z-horizon, the true strength after it.
double modified_level(const StrengthCurve& curve, double Z, double t);

std::string kind_name(const StrengthCurve& curve);

/// Z <= K up to the rounding of the analytic inverse, so Z = K(z_horizon(Z))
/// is always admissible.
inline bool level_admissible(double Z, double K) { return Z <= K + 1e-12 * (K > Z ? K : Z); }

}  // namespace cumdamage
