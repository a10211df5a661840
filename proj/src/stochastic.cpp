#include "cumdamage/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cumdamage/error.hpp"
#include "cumdamage/special_functions.hpp"

namespace cumdamage {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(what) + " must be a positive finite number", what);
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Marsaglia-Tsang for shape >= 1; shape < 1 boosted by U^(1/shape).
double sample_gamma(double shape, double scale, RandomStream& stream) {
  const bool boost = shape < 1.0;
  const double a = boost ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double x = 0.0;
  for (;;) {
    const double z = special::normal_quantile(stream.uniform());
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = stream.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
      x = d * v;
      break;
    }
  }
  if (boost) x *= std::exp(std::log(stream.uniform()) / shape);
  return x * scale;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t replication_index)
    : master_seed_(master_seed), replication_index_(replication_index) {
  std::uint64_t seeder = master_seed;
  const std::uint64_t seed_key = splitmix64(seeder);
  std::uint64_t index_mix = replication_index;
  std::uint64_t key = seed_key ^ splitmix64(index_mix);
  for (auto& word : state_) word = splitmix64(key);
}

std::uint64_t RandomStream::next_u64() {
  ++draw_counter_;
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

Exponential::Exponential(double rate) : rate(rate) { require_positive(rate, "rate"); }

LogNormal::LogNormal(double mu, double sigma) : mu(mu), sigma(sigma) {
  if (!std::isfinite(mu)) throw ValidationError("mu must be finite", "mu");
  require_positive(sigma, "sigma");
}

Weibull::Weibull(double scale, double shape) : scale(scale), shape(shape) {
  require_positive(scale, "scale");
  require_positive(shape, "shape");
}

Gamma::Gamma(double scale, double shape) : scale(scale), shape(shape) {
  require_positive(scale, "scale");
  require_positive(shape, "shape");
}

Deterministic::Deterministic(double value) : value(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError("value must be a nonnegative finite number", "value");
  }
}

double sample(const DistributionSpec& dist, RandomStream& stream) {
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return -std::log(stream.uniform()) / d.rate; },
          [&](const LogNormal& d) {
            return std::exp(d.mu + d.sigma * special::normal_quantile(stream.uniform()));
          },
          [&](const Weibull& d) {
            return d.scale * std::pow(-std::log(stream.uniform()), 1.0 / d.shape);
          },
          [&](const Gamma& d) { return sample_gamma(d.shape, d.scale, stream); },
          [&](const Deterministic& d) { return d.value; },
      },
      dist);
}

double cdf(const DistributionSpec& dist, double x) {
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x); },
          [&](const LogNormal& d) {
            return x <= 0.0 ? 0.0 : special::normal_cdf((std::log(x) - d.mu) / d.sigma);
          },
          [&](const Weibull& d) {
            return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / d.scale, d.shape));
          },
          [&](const Gamma& d) { return x <= 0.0 ? 0.0 : special::gamma_p(d.shape, x / d.scale); },
          [&](const Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
      },
      dist);
}

double mean(const DistributionSpec& dist) {
  return std::visit(
      overloaded{
          [](const Exponential& d) { return 1.0 / d.rate; },
          [](const LogNormal& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); },
          [](const Weibull& d) { return d.scale * std::tgamma(1.0 + 1.0 / d.shape); },
          [](const Gamma& d) { return d.shape * d.scale; },
          [](const Deterministic& d) { return d.value; },
      },
      dist);
}

double variance(const DistributionSpec& dist) {
  return std::visit(
      overloaded{
          [](const Exponential& d) { return 1.0 / (d.rate * d.rate); },
          [](const LogNormal& d) {
            const double s2 = d.sigma * d.sigma;
            return std::expm1(s2) * std::exp(2.0 * d.mu + s2);
          },
          [](const Weibull& d) {
            const double g1 = std::tgamma(1.0 + 1.0 / d.shape);
            const double g2 = std::tgamma(1.0 + 2.0 / d.shape);
            return d.scale * d.scale * (g2 - g1 * g1);
          },
          [](const Gamma& d) { return d.shape * d.scale * d.scale; },
          [](const Deterministic&) { return 0.0; },
      },
      dist);
}

double erlang_cdf(std::uint64_t j, double rate, double x) {
  if (j == 0) return x >= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  return special::gamma_p(static_cast<double>(j), rate * x);
}

std::string kind_name(const DistributionSpec& dist) {
  static constexpr const char* names[] = {"exponential", "lognormal", "weibull", "gamma",
                                          "deterministic"};
  return names[dist.index()];
}

IndependentSchedule::IndependentSchedule(ScheduleFamily family, double base_scale, double shape,
                                         Progression progression, ScheduleParameter parameter)
    : family(family),
      base_scale(base_scale),
      shape(shape),
      progression(progression),
      parameter(parameter) {
  require_positive(base_scale, "base_scale");
  require_positive(shape, "shape");
  if (const auto* geo = std::get_if<GeometricProgression>(&progression)) {
    require_positive(geo->ratio, "ratio");
  } else if (!std::isfinite(std::get<ArithmeticProgression>(progression).step)) {
    throw ValidationError("step must be finite", "step");
  }
}

double IndependentSchedule::scale_at(std::uint64_t i) const {
  const double k = static_cast<double>(i - 1);
  const double scale = std::visit(
      overloaded{
          [&](const ArithmeticProgression& p) { return base_scale + k * p.step; },
          [&](const GeometricProgression& p) { return base_scale * std::pow(p.ratio, k); },
      },
      progression);
  if (!(scale > 0.0)) {
    throw InvalidScheduleError("damage schedule scale is not positive at shock " +
                                   std::to_string(i),
                               i);
  }
  return parameter == ScheduleParameter::Rate ? 1.0 / scale : scale;
}

DependentAdditive::DependentAdditive(double theta0, double theta, ComponentForm form)
    : theta0(theta0), theta(theta), form(form) {
  require_positive(theta0, "theta0");
  require_positive(theta, "theta");
}

DistributionSpec DependentAdditive::shared_component() const {
  return form == ComponentForm::ShapeTheta ? DistributionSpec{Gamma(1.0, theta0)}
                                           : DistributionSpec{Gamma(theta0, 1.0)};
}

DistributionSpec DependentAdditive::individual_component() const {
  return form == ComponentForm::ShapeTheta ? DistributionSpec{Gamma(1.0, theta)}
                                           : DistributionSpec{Gamma(theta, 1.0)};
}

DamageDraw damage_at(const DamageModel& model, std::uint64_t i, RandomStream& stream,
                     std::optional<double> shared_state) {
  return std::visit(
      overloaded{
          [&](const IidDamage& m) { return DamageDraw{sample(m.dist, stream), shared_state}; },
          [&](const IndependentSchedule& m) {
            const double scale = m.scale_at(i);
            const DistributionSpec d = m.family == ScheduleFamily::Gamma
                                           ? DistributionSpec{Gamma(scale, m.shape)}
                                           : DistributionSpec{Weibull(scale, m.shape)};
            return DamageDraw{sample(d, stream), shared_state};
          },
          [&](const DependentAdditive& m) {
            if (!shared_state) shared_state = sample(m.shared_component(), stream);
            return DamageDraw{*shared_state + sample(m.individual_component(), stream),
                              shared_state};
          },
      },
      model);
}

double damage_mean(const DamageModel& model, std::uint64_t i) {
  return std::visit(
      overloaded{
          [&](const IidDamage& m) { return mean(m.dist); },
          [&](const IndependentSchedule& m) {
            const double scale = m.scale_at(i);
            return m.family == ScheduleFamily::Gamma ? m.shape * scale
                                                     : mean(Weibull(scale, m.shape));
          },
          [&](const DependentAdditive& m) {
            return mean(m.shared_component()) + mean(m.individual_component());
          },
      },
      model);
}

void validate_damage_model(const DamageModel& model, std::uint64_t cap) {
  if (const auto* s = std::get_if<IndependentSchedule>(&model)) {
    if (const auto* a = std::get_if<ArithmeticProgression>(&s->progression); a && a->step < 0) {
      // Scales fall linearly; scan the few indices around the first zero so
      // the error names the first nonpositive one.
      const double zero = 1.0 + s->base_scale / -a->step;
      const auto first = static_cast<std::uint64_t>(std::max(1.0, std::floor(zero) - 2.0));
      for (std::uint64_t i = first; i <= cap && i <= first + 4; ++i) s->scale_at(i);
    }
  }
}

}  // namespace cumdamage
