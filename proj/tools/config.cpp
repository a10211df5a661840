#include "config.hpp"

#include <fstream>
#include <sstream>

#include "cumdamage/error.hpp"
#include "json.hpp"

namespace cumdamage::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw SchemaError("expected an object", path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw SchemaError("unknown field", path + "." + key);
  }
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError("expected a number", path);
  return j.get<double>();
}

std::uint64_t count_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw SchemaError("expected a nonnegative integer", path);
  }
  return j.get<std::uint64_t>();
}

Range range_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("expected [low, high]", path);
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

OptimizerSettings parse_optimizer(const json& j) {
  const std::string p = "optimizer";
  reject_unknown(j, p,
                 {"T", "N", "Z", "coarse_points", "refine_factor", "passes", "initial_temp",
                  "cooling_ratio", "steps_per_temp", "min_temp", "initial_samples",
                  "step_fraction", "reps", "final_reps"});
  OptimizerSettings s;
  if (j.contains("T")) s.T = range_at(j["T"], p + ".T");
  if (j.contains("Z")) s.Z = range_at(j["Z"], p + ".Z");
  if (j.contains("N")) {
    const json& n = j["N"];
    if (!n.is_array() || n.size() != 2) throw SchemaError("expected [low, high]", p + ".N");
    s.N = IntRange{static_cast<std::uint32_t>(count_at(n[0], p + ".N[0]")),
                   static_cast<std::uint32_t>(count_at(n[1], p + ".N[1]"))};
  }
  auto u32 = [&](const char* key, std::uint32_t& out) {
    if (j.contains(key)) out = static_cast<std::uint32_t>(count_at(j[key], p + "." + key));
  };
  u32("coarse_points", s.grid.coarse_points);
  u32("refine_factor", s.grid.refine_factor);
  u32("passes", s.grid.passes);
  u32("steps_per_temp", s.anneal.steps_per_temp);
  u32("initial_samples", s.anneal.initial_samples);
  if (j.contains("initial_temp")) s.anneal.initial_temp = number_at(j["initial_temp"], p + ".initial_temp");
  if (j.contains("min_temp")) s.anneal.min_temp = number_at(j["min_temp"], p + ".min_temp");
  if (j.contains("cooling_ratio")) s.anneal.cooling_ratio = number_at(j["cooling_ratio"], p + ".cooling_ratio");
  if (j.contains("step_fraction")) s.anneal.step_fraction = number_at(j["step_fraction"], p + ".step_fraction");
  if (j.contains("reps")) s.reps = count_at(j["reps"], p + ".reps");
  if (j.contains("final_reps")) s.final_reps = count_at(j["final_reps"], p + ".final_reps");
  if (s.reps < 1) throw ValidationError("reps must be at least 1", p + ".reps");
  return s;
}

direct::NumericsConfig parse_numerics(const json& j) {
  const std::string p = "numerics";
  reject_unknown(j, p,
                 {"series_cap", "series_tolerance", "quadrature_abs_tol", "quadrature_rel_tol",
                  "horizon_quantile", "extra_series_terms", "inner_damage_quadrature"});
  direct::NumericsConfig c;
  if (j.contains("series_cap")) c.series_cap = count_at(j["series_cap"], p + ".series_cap");
  if (j.contains("series_tolerance")) c.series_tolerance = number_at(j["series_tolerance"], p + ".series_tolerance");
  if (j.contains("quadrature_abs_tol")) c.quadrature_abs_tol = number_at(j["quadrature_abs_tol"], p + ".quadrature_abs_tol");
  if (j.contains("quadrature_rel_tol")) c.quadrature_rel_tol = number_at(j["quadrature_rel_tol"], p + ".quadrature_rel_tol");
  if (j.contains("horizon_quantile")) c.horizon_quantile = number_at(j["horizon_quantile"], p + ".horizon_quantile");
  if (j.contains("extra_series_terms")) c.extra_series_terms = count_at(j["extra_series_terms"], p + ".extra_series_terms");
  if (j.contains("inner_damage_quadrature")) {
    if (!j["inner_damage_quadrature"].is_boolean()) {
      throw SchemaError("expected a boolean", p + ".inner_damage_quadrature");
    }
    c.inner_damage_quadrature = j["inner_damage_quadrature"].get<bool>();
  }
  c.validate();
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& document) {
  Scenario scenario = load_scenario(document);
  const json j = json::parse(document);
  RunConfig config{std::move(scenario), {}, {}, {}};
  json canonical = json::parse(dump_scenario(config.scenario));
  if (j.contains("optimizer")) {
    config.optimizer = parse_optimizer(j["optimizer"]);
    canonical["optimizer"] = j["optimizer"];
  }
  if (j.contains("numerics")) {
    config.numerics = parse_numerics(j["numerics"]);
    canonical["numerics"] = j["numerics"];
  }
  config.canonical = canonical.dump();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", "$");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

SearchSpace search_space_for(const RunConfig& config, bool T, bool N, bool Z) {
  SearchSpace space = default_search_space(config.scenario, T, N, Z);
  if (T && config.optimizer.T) space.T = config.optimizer.T;
  if (N && config.optimizer.N) space.N = config.optimizer.N;
  if (Z && config.optimizer.Z) space.Z = config.optimizer.Z;
  space.validate();
  return space;
}

}  // namespace cumdamage::cli
