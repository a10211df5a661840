#pragma once

// Shock inter-arrival and damage distributions, damage-sequence models and
// the replication-indexed random streams used by the simulator.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace cumdamage {

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// A reproducible stream of 64-bit variates keyed by (master_seed,
/// replication_index). The state is a xoshiro256** generator whose 256-bit
/// state is expanded from the key by SplitMix64, so equal keys give equal
/// sequences and distinct replication indices give unrelated ones.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t replication_index);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform();

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t replication_index() const noexcept { return replication_index_; }
  std::uint64_t draw_counter() const noexcept { return draw_counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t replication_index_;
  std::uint64_t draw_counter_ = 0;
  std::array<std::uint64_t, 4> state_{};
};

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

/// Exponential with mean 1/rate.
struct Exponential {
  double rate;
  explicit Exponential(double rate);
  bool operator==(const Exponential&) const = default;
};

/// Log-normal with normal parameters (mu, sigma); mean exp(mu + sigma^2/2).
struct LogNormal {
  double mu;
  double sigma;
  LogNormal(double mu, double sigma);
  bool operator==(const LogNormal&) const = default;
};

/// Weibull with scale alpha and shape beta; mean alpha * Gamma(1 + 1/beta).
struct Weibull {
  double scale;
  double shape;
  Weibull(double scale, double shape);
  bool operator==(const Weibull&) const = default;
};

/// Gamma with scale theta and shape delta; mean delta * theta.
struct Gamma {
  double scale;
  double shape;
  Gamma(double scale, double shape);
  bool operator==(const Gamma&) const = default;
};

/// Point mass, for hand-traceable simulations.
struct Deterministic {
  double value;
  explicit Deterministic(double value);
  bool operator==(const Deterministic&) const = default;
};

using DistributionSpec = std::variant<Exponential, LogNormal, Weibull, Gamma, Deterministic>;

/// One variate. Exponential, log-normal and Weibull use a single uniform
/// through the inverse CDF; Gamma uses Marsaglia-Tsang with inverse-CDF
/// normals; Deterministic consumes no draws.
double sample(const DistributionSpec& dist, RandomStream& stream);

/// P[X <= x].
double cdf(const DistributionSpec& dist, double x);

double mean(const DistributionSpec& dist);
double variance(const DistributionSpec& dist);

/// CDF of the sum of j iid Exponential(rate) variables.
double erlang_cdf(std::uint64_t j, double rate, double x);

std::string kind_name(const DistributionSpec& dist);

// ---------------------------------------------------------------------------
// Damage models
// ---------------------------------------------------------------------------

struct IidDamage {
  DistributionSpec dist;
  bool operator==(const IidDamage&) const = default;
};

enum class ScheduleFamily { Gamma, Weibull };

struct ArithmeticProgression {
  double step;
  bool operator==(const ArithmeticProgression&) const = default;
};

struct GeometricProgression {
  double ratio;
  bool operator==(const GeometricProgression&) const = default;
};

using Progression = std::variant<ArithmeticProgression, GeometricProgression>;

/// Which distribution parameter the progression describes.
enum class ScheduleParameter {
  Scale,
  /// The progression gives the rate; the scale is its reciprocal.
  Rate,
};

/// Independent, non-identically distributed damages: the i-th damage has
/// scale base_scale + (i-1)*step (arithmetic) or base_scale * ratio^(i-1)
/// (geometric) and a common shape.
struct IndependentSchedule {
  ScheduleFamily family;
  double base_scale;
  double shape;
  Progression progression;
  ScheduleParameter parameter = ScheduleParameter::Scale;

  IndependentSchedule(ScheduleFamily family, double base_scale, double shape,
                      Progression progression,
                      ScheduleParameter parameter = ScheduleParameter::Scale);

  /// Scale of the i-th damage (1-based). Throws InvalidScheduleError when it
  /// is not strictly positive.
  double scale_at(std::uint64_t i) const;

  bool operator==(const IndependentSchedule&) const = default;
};

/// How the gamma components of the dependent model are parameterized.
enum class ComponentForm {
  /// Gamma(shape = theta, scale = 1), the classical multivariate-gamma build.
  ShapeTheta,
  /// Exponential with mean theta, i.e. Gamma(scale = theta, shape = 1).
  ExponentialMean,
};

/// W_i = Z_0 + Z_i with Z_0 shared by every shock of one lifetime.
struct DependentAdditive {
  double theta0;
  double theta;
  ComponentForm form = ComponentForm::ShapeTheta;

  DependentAdditive(double theta0, double theta, ComponentForm form = ComponentForm::ShapeTheta);

  DistributionSpec shared_component() const;
  DistributionSpec individual_component() const;

  bool operator==(const DependentAdditive&) const = default;
};

using DamageModel = std::variant<IidDamage, IndependentSchedule, DependentAdditive>;

struct DamageDraw {
  double damage;
  std::optional<double> shared_state;
};

/// The i-th damage (1-based). For the dependent model the shared component is
/// drawn when `shared_state` is empty and must be passed back on later calls.
DamageDraw damage_at(const DamageModel& model, std::uint64_t i, RandomStream& stream,
                     std::optional<double> shared_state);

/// Mean of the i-th damage.
double damage_mean(const DamageModel& model, std::uint64_t i);

/// Checks an arithmetic schedule stays positive up to `cap` shocks.
void validate_damage_model(const DamageModel& model, std::uint64_t cap);

}  // namespace cumdamage
