#include "cumdamage/direct.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "cumdamage/error.hpp"
#include "cumdamage/quadrature.hpp"
#include "cumdamage/special_functions.hpp"
#include "cumdamage/strength.hpp"

namespace cumdamage::direct {

namespace sf = special;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCacheLimit = 4096;

struct Rates {
  double lambda;
  double mu;
};

Rates require_exp_exp(const Scenario& scenario) {
  const auto* arrival = std::get_if<Exponential>(&scenario.inter_arrival);
  const auto* iid = std::get_if<IidDamage>(&scenario.damage);
  const auto* damage = iid ? std::get_if<Exponential>(&iid->dist) : nullptr;
  if (!arrival || !damage) {
    throw UnsupportedError(
        "direct engine requires exponential inter-arrivals and iid exponential damages (got " +
        kind_name(scenario.inter_arrival) + " inter-arrivals); use the simulation engine");
  }
  return {arrival->rate, damage->rate};
}

QuadratureOptions quad_options(const NumericsConfig& cfg) {
  QuadratureOptions q;
  q.abs_tol = cfg.quadrature_abs_tol;
  q.rel_tol = cfg.quadrature_rel_tol;
  return q;
}

// Largest j worth keeping in a Poisson(x) series.
std::uint64_t truncation_index(double x, const NumericsConfig& cfg) {
  std::vector<double> w;
  sf::poisson_weights(x, cfg.series_tolerance, cfg.series_cap, cfg.extra_series_terms, w);
  return w.size() - 1;
}

// Time beyond which fewer than j+1 arrivals is negligible.
double arrival_horizon(std::uint64_t j, double lambda, const NumericsConfig& cfg) {
  return sf::erlang_quantile_unit(j + 1, cfg.horizon_quantile) / lambda;
}

struct Window {
  double low;
  double high;
};

// Interval holding all but a negligible part of the Erlang(j+1, lambda) law:
// Wilson-Hilferty quantiles widened by one more standard normal unit.
Window arrival_window(std::uint64_t j, double lambda, const NumericsConfig& cfg) {
  const double n = static_cast<double>(j + 1);
  const double z = sf::normal_quantile(cfg.horizon_quantile) + 1.0;
  const double c = 1.0 - 1.0 / (9.0 * n);
  const double spread = z / (3.0 * std::sqrt(n));
  const double lo = std::max(0.0, c - spread);
  const double hi = c + spread;
  return {n * lo * lo * lo / lambda, n * hi * hi * hi / lambda};
}

// Integral of the Erlang(j+1, lambda) density times f over [a, b], restricted
// to the window where that density lives so narrow peaks are never missed.
double erlang_integral(const std::function<double(double)>& f, std::uint64_t j, double lambda,
                       double a, double b, const NumericsConfig& cfg, std::vector<double> breaks = {}) {
  const Window w = arrival_window(j, lambda, cfg);
  const double lo = std::max(a, w.low);
  const double hi = std::min(b, w.high);
  if (!(hi > lo)) return 0.0;
  const double mode = static_cast<double>(j) / lambda;
  breaks.push_back(mode);
  std::vector<double> inside;
  for (double x : breaks) {
    if (x > lo && x < hi) inside.push_back(x);
  }
  std::sort(inside.begin(), inside.end());
  return integrate(f, lo, hi, quad_options(cfg), inside).value;
}

void check_probabilities(const Probabilities& p) {
  for (double v : {p.p_T, p.p_N, p.p_Z, p.p_K}) {
    if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9) {
      throw NumericalError("replacement probability out of range");
    }
  }
}

Evaluation finish(const Scenario& scenario, Probabilities p, double mean_time) {
  if (!(mean_time > 0.0) || !std::isfinite(mean_time)) {
    throw NumericalError("mean time to replacement is not positive");
  }
  check_probabilities(p);
  const CostVector& c = scenario.costs;
  const double cost = c.c_T * p.p_T + c.c_N * p.p_N + c.c_Z * p.p_Z + c.c_K * p.p_K;
  return {cost / mean_time, p, mean_time};
}

// ---------------------------------------------------------------------------
// General path: survival below the modified level min(Z, K(t)).
// ---------------------------------------------------------------------------

Evaluation evaluate_general(const Scenario& scenario, const Policy& policy,
                            const NumericsConfig& cfg) {
  const auto [lambda, mu] = require_exp_exp(scenario);
  const StrengthCurve& curve = scenario.strength;
  const double K0 = initial_strength(curve);
  const double Z = policy.Z.value_or(kInf);
  const double T = policy.T.value_or(kInf);
  const double t_zero = zero_time(curve);
  const double T0 = policy.Z ? z_horizon(curve, Z) : kInf;

  // Damage can never sit below min(Z, K0) with more than j_max shocks.
  std::uint64_t j_max = truncation_index(mu * std::min(Z, K0), cfg);
  if (policy.N) j_max = std::min<std::uint64_t>(j_max, *policy.N - 1);
  const double horizon = arrival_horizon(j_max, lambda, cfg);
  const double upper = std::min({T, t_zero, horizon});

  std::vector<double> breaks;
  if (T0 < upper) breaks.push_back(T0);
  const QuadratureOptions qopt = quad_options(cfg);

  auto level_at = [&](double t) { return std::min(Z, strength_at(curve, t)); };

  // Survival counting cycles with at least `from` shocks.
  auto survival_from = [&](double t, std::size_t from) {
    const double level = level_at(t);
    if (!(level > 0.0)) return 0.0;
    std::vector<double> w;
    sf::poisson_weights(lambda * t, cfg.series_tolerance, cfg.series_cap,
                        cfg.extra_series_terms, w);
    const std::size_t n = std::min<std::size_t>(w.size(), j_max + 1);
    std::vector<double> q;
    sf::poisson_upper_tails(mu * level, n, q);
    double s = 0.0;
    for (std::size_t j = from; j < n; ++j) s += w[j] * q[j];
    return s;
  };

  // The shock-free term e^{-lambda t} is integrated in closed form up to the
  // end of the cycle.
  const double no_shock = -std::expm1(-lambda * std::min(T, t_zero)) / lambda;
  const double with_shocks =
      j_max == 0 ? 0.0
                 : integrate([&](double t) { return survival_from(t, 1); }, 0.0, upper, qopt, breaks)
                       .value;
  const double mean_time = no_shock + with_shocks;

  Probabilities p;
  if (policy.T) p.p_T = survival_from(T, 0);

  if (policy.N) {
    const double N = *policy.N;
    auto density = [&](double s) {
      const double level = level_at(s);
      if (!(level > 0.0)) return 0.0;
      return lambda * sf::poisson_pmf(*policy.N - 1, lambda * s) * sf::gamma_p(N, mu * level);
    };
    p.p_N = erlang_integral(density, *policy.N - 1, lambda, 0.0, std::min(T, t_zero), cfg,
                            {T0});
  }

  if (policy.Z) {
    std::vector<double> z_mass(j_max + 1);
    for (std::uint64_t j = 0; j <= j_max; ++j) z_mass[j] = sf::poisson_pmf(j, mu * Z);
    auto density = [&](double s) {
      const double K = strength_at(curve, s);
      if (!(K > Z)) return 0.0;
      std::vector<double> w;
      sf::poisson_weights(lambda * s, cfg.series_tolerance, cfg.series_cap,
                          cfg.extra_series_terms, w);
      const std::size_t n = std::min<std::size_t>(w.size(), j_max + 1);
      double sum = 0.0;
      if (cfg.inner_damage_quadrature) {
        for (std::size_t j = 0; j < n; ++j) sum += w[j] * inner_damage_mass(j, mu, Z, K, true, cfg);
      } else {
        for (std::size_t j = 0; j < n; ++j) sum += w[j] * z_mass[j];
        sum *= -std::expm1(-mu * (K - Z));
      }
      return lambda * sum;
    };
    p.p_Z = integrate(density, 0.0, std::min({T, T0, horizon}), qopt).value;
  }

  p.p_K = std::max(0.0, 1.0 - p.p_T - p.p_N - p.p_Z);
  return finish(scenario, p, mean_time);
}

}  // namespace

// ---------------------------------------------------------------------------
// Joint path: with T and Z active and Z <= K(T), the modified level is Z on
// the whole of [0, T], and every quantity is a sum over the shock count j of
// terms that do not depend on N.
// ---------------------------------------------------------------------------

struct Evaluator::Profile {
  double lambda = 0.0;
  double T = 0.0;
  double mu_Z = 0.0;
  // Prefix sums over j = 0..k-1 at index k.
  std::vector<double> planned;   // pois(j; lambda T) Q_j(mu Z)
  std::vector<double> level;     // pois(j; mu Z) (P(j+1, lambda T) - I_j)
  std::vector<double> failure;   // pois(j; mu Z) I_j
  std::vector<double> duration;  // Q_j(mu Z) P(j+1, lambda T) / lambda
};

namespace {

std::shared_ptr<const Evaluator::Profile> build_profile(const Scenario& scenario, double T,
                                                        double Z, const NumericsConfig& cfg) {
  const auto [lambda, mu] = require_exp_exp(scenario);
  const StrengthCurve& curve = scenario.strength;
  auto prof = std::make_shared<Evaluator::Profile>();
  prof->lambda = lambda;
  prof->T = T;
  prof->mu_Z = mu * Z;

  const std::uint64_t J = truncation_index(mu * Z, cfg);
  std::vector<double> tails;
  sf::poisson_upper_tails(mu * Z, J + 1, tails);

  prof->planned.assign(J + 2, 0.0);
  prof->level.assign(J + 2, 0.0);
  prof->failure.assign(J + 2, 0.0);
  prof->duration.assign(J + 2, 0.0);
  for (std::uint64_t j = 0; j <= J; ++j) {
    const double z_mass = sf::poisson_pmf(j, mu * Z);
    const double arrived = sf::gamma_p(static_cast<double>(j + 1), lambda * T);
    double failing = 0.0;
    if (z_mass > 0.0) {
      auto density = [&](double s) {
        const double excess = strength_at(curve, s) - Z;
        return lambda * sf::poisson_pmf(j, lambda * s) * std::exp(-mu * excess);
      };
      failing = erlang_integral(density, j, lambda, 0.0, T, cfg);
    }
    prof->planned[j + 1] = prof->planned[j] + sf::poisson_pmf(j, lambda * T) * tails[j];
    prof->level[j + 1] = prof->level[j] + z_mass * (arrived - failing);
    prof->failure[j + 1] = prof->failure[j] + z_mass * failing;
    prof->duration[j + 1] = prof->duration[j] + tails[j] * arrived / lambda;
  }
  return prof;
}

struct JointParts {
  Probabilities p;
  double p_K_complement;
  double mean_time;
};

JointParts evaluate_profile(const Evaluator::Profile& prof, std::optional<std::uint32_t> N) {
  const std::size_t last = prof.planned.size() - 1;
  const std::size_t k = N ? std::min<std::size_t>(*N, last) : last;
  JointParts out{};
  out.p.p_T = prof.planned[k];
  out.p.p_Z = prof.level[k];
  out.p.p_K = prof.failure[k];
  if (N) {
    const double n = *N;
    out.p.p_N = sf::gamma_p(n, prof.lambda * prof.T) * sf::gamma_p(n, prof.mu_Z);
  }
  out.p_K_complement = 1.0 - out.p.p_T - out.p.p_N - out.p.p_Z;
  out.mean_time = prof.duration[k];
  return out;
}

bool joint_shape(const Policy& policy) { return policy.T && policy.Z; }

JointParts joint_parts(const Scenario& scenario, const Policy& policy, const NumericsConfig& cfg) {
  return evaluate_profile(*build_profile(scenario, *policy.T, *policy.Z, cfg), policy.N);
}

}  // namespace

void NumericsConfig::validate() const {
  if (series_cap < 1) throw ValidationError("series_cap must be positive", "numerics.series_cap");
  if (!(series_tolerance > 0.0)) {
    throw ValidationError("series_tolerance must be positive", "numerics.series_tolerance");
  }
  if (!(quadrature_abs_tol > 0.0)) {
    throw ValidationError("quadrature_abs_tol must be positive", "numerics.quadrature_abs_tol");
  }
  if (!(quadrature_rel_tol > 0.0)) {
    throw ValidationError("quadrature_rel_tol must be positive", "numerics.quadrature_rel_tol");
  }
  if (!(horizon_quantile > 0.0 && horizon_quantile < 1.0)) {
    throw ValidationError("horizon_quantile must lie in (0, 1)", "numerics.horizon_quantile");
  }
}

bool supports(const Scenario& scenario) {
  const auto* iid = std::get_if<IidDamage>(&scenario.damage);
  return std::holds_alternative<Exponential>(scenario.inter_arrival) && iid &&
         std::holds_alternative<Exponential>(iid->dist);
}

Evaluation evaluate(const Scenario& scenario, const Policy& policy, const NumericsConfig& cfg) {
  cfg.validate();
  require_exp_exp(scenario);
  require_valid_policy(scenario, policy);
  if (joint_shape(policy)) {
    const JointParts parts = joint_parts(scenario, policy, cfg);
    Probabilities p = parts.p;
    p.p_K = std::max(0.0, parts.p_K_complement);
    return finish(scenario, p, parts.mean_time);
  }
  return evaluate_general(scenario, policy, cfg);
}

double cost_rate_T(const Scenario& scenario, double T, const NumericsConfig& cfg) {
  return evaluate(scenario, Policy{T, std::nullopt, std::nullopt}, cfg).cost_rate;
}

double cost_rate_N(const Scenario& scenario, std::uint32_t N, const NumericsConfig& cfg) {
  return evaluate(scenario, Policy{std::nullopt, N, std::nullopt}, cfg).cost_rate;
}

double cost_rate_Z(const Scenario& scenario, double Z, const NumericsConfig& cfg) {
  return evaluate(scenario, Policy{std::nullopt, std::nullopt, Z}, cfg).cost_rate;
}

double cost_rate_TNZ(const Scenario& scenario, const Policy& policy, const NumericsConfig& cfg) {
  if (!policy.T || !policy.N || !policy.Z) {
    throw ValidationError("joint cost rate needs T, N and Z", "policy");
  }
  return evaluate(scenario, policy, cfg).cost_rate;
}

Probabilities replacement_probabilities(const Scenario& scenario, const Policy& policy,
                                        const NumericsConfig& cfg) {
  if (!policy.T || !policy.N || !policy.Z) {
    throw ValidationError("replacement probabilities need T, N and Z", "policy");
  }
  cfg.validate();
  require_exp_exp(scenario);
  require_valid_policy(scenario, policy);
  const JointParts parts = joint_parts(scenario, policy, cfg);
  if (std::abs(parts.p.p_K - parts.p_K_complement) > 1e-8) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "failure probability " << parts.p.p_K << " disagrees with complement "
        << parts.p_K_complement;
    throw NumericalError(msg.str());
  }
  check_probabilities(parts.p);
  return parts.p;
}

double mean_time_to_replacement(const Scenario& scenario, const Policy& policy,
                                const NumericsConfig& cfg) {
  return evaluate(scenario, policy, cfg).mean_time;
}

double inner_damage_mass(std::uint64_t j, double mu, double Z, double K, bool quadrature,
                         const NumericsConfig& cfg) {
  if (!(K > Z)) return 0.0;
  if (!quadrature) return sf::poisson_pmf(j, mu * Z) * -std::expm1(-mu * (K - Z));
  // Point mass at zero damage for j = 0.
  auto jump = [&](double x) { return std::exp(-mu * (Z - x)) - std::exp(-mu * (K - x)); };
  if (j == 0) return jump(0.0);
  auto integrand = [&](double x) { return mu * sf::poisson_pmf(j - 1, mu * x) * jump(x); };
  QuadratureOptions q = quad_options(cfg);
  q.abs_tol = std::min(q.abs_tol, 1e-13);
  return integrate(integrand, 0.0, Z, q).value;
}

Evaluator::Evaluator(Scenario scenario, NumericsConfig cfg)
    : scenario_(std::move(scenario)), cfg_(cfg) {
  cfg_.validate();
  require_exp_exp(scenario_);
}

Evaluator::~Evaluator() = default;

Evaluation Evaluator::operator()(const Policy& policy) const {
  require_valid_policy(scenario_, policy);
  if (!joint_shape(policy)) return evaluate_general(scenario_, policy, cfg_);
  const auto key = std::make_pair(*policy.T, *policy.Z);
  std::shared_ptr<const Profile> prof;
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) prof = it->second;
  }
  if (!prof) {
    prof = build_profile(scenario_, *policy.T, *policy.Z, cfg_);
    std::lock_guard lock(mutex_);
    if (cache_.size() >= kCacheLimit) cache_.clear();
    cache_.emplace(key, prof);
  }
  const JointParts parts = evaluate_profile(*prof, policy.N);
  Probabilities p = parts.p;
  p.p_K = std::max(0.0, parts.p_K_complement);
  return finish(scenario_, p, parts.mean_time);
}

}  // namespace cumdamage::direct
