#include "cumdamage/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cumdamage/error.hpp"
#include "cumdamage/parallel.hpp"
#include "cumdamage/special_functions.hpp"
#include "cumdamage/strength.hpp"

namespace cumdamage {

namespace {

struct ContinuousAxis {
  std::vector<double> values;
  double spacing = 0.0;
};

struct CountAxis {
  std::vector<std::uint32_t> values;
  std::uint32_t stride = 1;
};

ContinuousAxis spaced(double lo, double hi, double spacing) {
  ContinuousAxis axis{{}, spacing};
  if (!(hi > lo) || !(spacing > 0.0)) {
    axis.values.push_back(lo);
    return axis;
  }
  const auto steps = static_cast<std::uint64_t>(std::floor((hi - lo) / spacing + 1e-9));
  for (std::uint64_t k = 0; k <= steps; ++k) axis.values.push_back(lo + static_cast<double>(k) * spacing);
  if (hi - axis.values.back() > 1e-9 * spacing) {
    axis.values.push_back(hi);
  } else {
    axis.values.back() = hi;
  }
  return axis;
}

CountAxis strided(std::uint32_t lo, std::uint32_t hi, std::uint32_t stride) {
  CountAxis axis{{}, stride};
  for (std::uint64_t n = lo; n <= hi; n += stride) axis.values.push_back(static_cast<std::uint32_t>(n));
  if (axis.values.back() != hi) axis.values.push_back(hi);
  return axis;
}

std::uint32_t ceil_div(std::uint32_t a, std::uint32_t b) { return (a + b - 1) / b; }

// Strict lexicographic order on (T, N, Z); inactive components compare equal.
bool lex_less(const Policy& a, const Policy& b) {
  if (a.T != b.T) return a.T < b.T;
  if (a.N != b.N) return a.N < b.N;
  return a.Z < b.Z;
}

bool better(double value, const Policy& policy, double best_value, const Policy& best) {
  if (value < best_value) return true;
  return value == best_value && lex_less(policy, best);
}

double reflect(double x, double lo, double hi) {
  if (!(hi > lo)) return lo;
  const double width = hi - lo;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  return y <= width ? lo + y : hi - (y - width);
}

std::uint32_t reflect_count(std::int64_t n, std::uint32_t lo, std::uint32_t hi) {
  if (hi <= lo) return lo;
  const std::int64_t width = hi - lo;
  std::int64_t y = (n - lo) % (2 * width);
  if (y < 0) y += 2 * width;
  return static_cast<std::uint32_t>(y <= width ? lo + y : hi - (y - width));
}

}  // namespace

void SearchSpace::validate() const {
  if (!T && !N && !Z) throw ValidationError("search space has no active variable", "variables");
  if (T && !(T->low < T->high)) throw ValidationError("T range needs low < high", "optimizer.T");
  if (N && !(N->low < N->high)) throw ValidationError("N range needs low < high", "optimizer.N");
  if (N && N->low < 1) throw ValidationError("N range must start at 1 or above", "optimizer.N");
  if (Z && !(Z->low < Z->high)) throw ValidationError("Z range needs low < high", "optimizer.Z");
  if (Z && strength && Z->high > initial_strength(*strength)) {
    throw ValidationError("Z range exceeds the initial strength", "optimizer.Z");
  }
}

bool SearchSpace::feasible(const Policy& p) const {
  if (p.T.has_value() != T.has_value() || p.N.has_value() != N.has_value() ||
      p.Z.has_value() != Z.has_value()) {
    return false;
  }
  if (T && (*p.T < T->low || *p.T > T->high)) return false;
  if (N && (*p.N < N->low || *p.N > N->high)) return false;
  if (Z && (*p.Z < Z->low || *p.Z > Z->high)) return false;
  if (T && Z && strength && !level_admissible(*p.Z, strength_at(*strength, *p.T))) return false;
  return true;
}

SearchSpace default_search_space(const Scenario& scenario, bool T, bool N, bool Z) {
  SearchSpace space;
  space.strength = scenario.strength;
  const double mu_F = scenario.mean_inter_arrival();
  const double K0 = initial_strength(scenario.strength);
  if (T) space.T = Range{0.1 * mu_F, 50.0 * mu_F};
  if (N) space.N = IntRange{1, 200};
  if (Z) space.Z = Range{0.05 * K0, K0};
  return space;
}

std::string method_name(Method method) { return method == Method::Grid ? "grid" : "anneal"; }

std::optional<Policy> project_feasible(const SearchSpace& space, const Policy& policy) {
  if (space.feasible(policy)) return policy;
  if (!space.T || !space.Z || !space.strength || !policy.T || !policy.Z) return std::nullopt;

  std::optional<Policy> best;
  double best_distance = std::numeric_limits<double>::infinity();
  auto offer = [&](const Policy& candidate, double distance) {
    if (space.feasible(candidate) && distance < best_distance) {
      best = candidate;
      best_distance = distance;
    }
  };

  Policy lowered = policy;
  lowered.Z = strength_at(*space.strength, *policy.T);
  offer(lowered, (*policy.Z - *lowered.Z) / (space.Z->high - space.Z->low));

  if (const auto t0 = crossing_time(*space.strength, *policy.Z)) {
    Policy earlier = policy;
    earlier.T = *t0;
    offer(earlier, std::abs(*policy.T - *t0) / (space.T->high - space.T->low));
  }
  return best;
}

OptimResult grid_search(const Objective& objective, const SearchSpace& space,
                        const GridConfig& config) {
  space.validate();
  if (config.coarse_points < 2) {
    throw ValidationError("coarse_points must be at least 2", "optimizer.coarse_points");
  }
  if (config.refine_factor < 1) {
    throw ValidationError("refine_factor must be positive", "optimizer.refine_factor");
  }
  if (config.passes < 1) throw ValidationError("passes must be positive", "optimizer.passes");

  OptimResult result;
  result.method = Method::Grid;
  result.best_value = std::numeric_limits<double>::infinity();
  bool found = false;

  ContinuousAxis t_axis;
  ContinuousAxis z_axis;
  CountAxis n_axis;
  const double points = config.coarse_points - 1;
  if (space.T) t_axis = spaced(space.T->low, space.T->high, (space.T->high - space.T->low) / points);
  if (space.Z) z_axis = spaced(space.Z->low, space.Z->high, (space.Z->high - space.Z->low) / points);
  if (space.N) {
    n_axis = strided(space.N->low, space.N->high,
                     std::max(1u, ceil_div(space.N->high - space.N->low, config.coarse_points - 1)));
  }

  for (std::uint32_t pass = 0; pass < config.passes; ++pass) {
    if (pass > 0) {
      const double rf = config.refine_factor;
      if (space.T) {
        const double x = *result.best_policy.T;
        const double h = t_axis.spacing;
        t_axis = spaced(std::max(space.T->low, x - h), std::min(space.T->high, x + h), h / rf);
      }
      if (space.Z) {
        const double x = *result.best_policy.Z;
        const double h = z_axis.spacing;
        z_axis = spaced(std::max(space.Z->low, x - h), std::min(space.Z->high, x + h), h / rf);
      }
      if (space.N) {
        const std::uint32_t n = *result.best_policy.N;
        const std::uint32_t s = n_axis.stride;
        const std::uint32_t lo = n > space.N->low + s ? n - s : space.N->low;
        const std::uint32_t hi = std::min(space.N->high, n + s);
        n_axis = strided(lo, hi, std::max(1u, ceil_div(s, config.refine_factor)));
      }
    }

    // N innermost so joint evaluators can reuse per-(T, Z) work.
    std::vector<Policy> cells;
    const std::vector<double> no_value{0.0};
    const std::vector<std::uint32_t> no_count{0};
    for (double t : space.T ? t_axis.values : no_value) {
      for (double z : space.Z ? z_axis.values : no_value) {
        for (std::uint32_t n : space.N ? n_axis.values : no_count) {
          Policy p;
          if (space.T) p.T = t;
          if (space.N) p.N = n;
          if (space.Z) p.Z = z;
          if (space.feasible(p)) cells.push_back(p);
        }
      }
    }

    std::vector<double> values(cells.size());
    parallel_chunks(cells.size(), config.workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) values[i] = objective(cells[i]);
    });

    for (std::size_t i = 0; i < cells.size(); ++i) {
      const bool improved =
          !found || better(values[i], cells[i], result.best_value, result.best_policy);
      if (improved) {
        result.best_value = values[i];
        result.best_policy = cells[i];
        found = true;
      }
      result.trace.push_back({cells[i], values[i], improved});
    }
    result.evaluations += cells.size();
    if (!found) throw InfeasibleSpaceError("no feasible grid cell", "optimizer");
    if (pass == 0) result.coarse_best = result.best_value;
  }
  return result;
}

OptimResult simulated_annealing(const Objective& objective, const SearchSpace& space,
                                const AnnealConfig& config, std::uint64_t seed) {
  space.validate();
  if (!(config.cooling_ratio > 0.0 && config.cooling_ratio < 1.0)) {
    throw ValidationError("cooling_ratio must lie in (0, 1)", "optimizer.cooling_ratio");
  }
  if (config.steps_per_temp < 1) {
    throw ValidationError("steps_per_temp must be positive", "optimizer.steps_per_temp");
  }
  if (config.initial_samples < 1) {
    throw ValidationError("initial_samples must be positive", "optimizer.initial_samples");
  }
  if (config.initial_temp && !(*config.initial_temp > 0.0)) {
    throw ValidationError("initial_temp must be positive", "optimizer.initial_temp");
  }
  if (config.min_temp && !(*config.min_temp > 0.0)) {
    throw ValidationError("min_temp must be positive", "optimizer.min_temp");
  }
  if (!(config.step_fraction > 0.0)) {
    throw ValidationError("step_fraction must be positive", "optimizer.step_fraction");
  }

  // Stream index kept clear of the replication streams of a bank built on the same seed.
  RandomStream rng(seed, std::numeric_limits<std::uint64_t>::max());
  OptimResult result;
  result.method = Method::Anneal;
  result.seed = seed;

  auto evaluate = [&](const Policy& p, bool accepted) {
    const double v = objective(p);
    ++result.evaluations;
    result.trace.push_back({p, v, accepted});
    return v;
  };

  auto random_point = [&]() {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Policy p;
      if (space.T) p.T = space.T->low + rng.uniform() * (space.T->high - space.T->low);
      if (space.N) {
        const double width = space.N->high - space.N->low + 1.0;
        p.N = std::min(space.N->high,
                       space.N->low + static_cast<std::uint32_t>(rng.uniform() * width));
      }
      if (space.Z) p.Z = space.Z->low + rng.uniform() * (space.Z->high - space.Z->low);
      if (auto q = project_feasible(space, p)) return *q;
    }
    throw InfeasibleSpaceError("no feasible point found in the search space", "optimizer");
  };

  std::vector<double> sample_values;
  Policy current;
  double current_value = std::numeric_limits<double>::infinity();
  for (std::uint32_t k = 0; k < config.initial_samples; ++k) {
    const Policy p = random_point();
    const double v = evaluate(p, false);
    sample_values.push_back(v);
    if (better(v, p, current_value, current)) {
      current = p;
      current_value = v;
    }
  }
  result.best_policy = current;
  result.best_value = current_value;

  double temp;
  if (config.initial_temp) {
    temp = *config.initial_temp;
  } else {
    double mean = 0.0;
    for (double v : sample_values) mean += v;
    mean /= static_cast<double>(sample_values.size());
    double ss = 0.0;
    for (double v : sample_values) ss += (v - mean) * (v - mean);
    temp = sample_values.size() > 1 ? std::sqrt(ss / static_cast<double>(sample_values.size() - 1))
                                    : 0.0;
    if (!(temp > 0.0)) temp = std::max(std::abs(mean) * 1e-3, 1e-12);
  }
  const double min_temp = config.min_temp.value_or(1e-4 * temp);

  auto propose = [&](const Policy& from) {
    Policy p = from;
    if (space.T) {
      const double step = config.step_fraction * (space.T->high - space.T->low);
      p.T = reflect(*p.T + step * special::normal_quantile(rng.uniform()), space.T->low,
                    space.T->high);
    }
    if (space.N) {
      const auto magnitude = 1 + static_cast<std::int64_t>(rng.uniform() * 3.0);
      const std::int64_t delta = rng.uniform() < 0.5 ? -magnitude : magnitude;
      p.N = reflect_count(static_cast<std::int64_t>(*p.N) + delta, space.N->low, space.N->high);
    }
    if (space.Z) {
      const double step = config.step_fraction * (space.Z->high - space.Z->low);
      p.Z = reflect(*p.Z + step * special::normal_quantile(rng.uniform()), space.Z->low,
                    space.Z->high);
    }
    return project_feasible(space, p);
  };

  while (temp > min_temp) {
    for (std::uint32_t step = 0; step < config.steps_per_temp; ++step) {
      const auto candidate = propose(current);
      if (!candidate) continue;
      const double v = objective(*candidate);
      ++result.evaluations;
      const double delta = v - current_value;
      const bool accept = delta <= 0.0 || rng.uniform() < std::exp(-delta / temp);
      result.trace.push_back({*candidate, v, accept});
      if (accept) {
        current = *candidate;
        current_value = v;
      }
      if (better(v, *candidate, result.best_value, result.best_policy)) {
        result.best_value = v;
        result.best_policy = *candidate;
      }
    }
    temp *= config.cooling_ratio;
  }
  return result;
}

Objective direct_objective(std::shared_ptr<const direct::Evaluator> evaluator) {
  return [evaluator](const Policy& p) { return (*evaluator)(p).cost_rate; };
}

Objective simulation_objective(std::shared_ptr<const ReplicationBank> bank, CostVector costs) {
  return [bank, costs](const Policy& p) { return bank->estimate(p, costs).cost_rate; };
}

ReplicationBank::Horizon bank_horizon(const SearchSpace& space) {
  ReplicationBank::Horizon h;
  if (space.T) h.t_max = space.T->high;
  if (space.N) h.n_max = space.N->high;
  return h;
}

}  // namespace cumdamage
