#include "cumdamage/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "cumdamage/error.hpp"
#include "json.hpp"

namespace cumdamage {

using nlohmann::json;

namespace {

constexpr std::uint64_t kScheduleCheckCap = 1'000'000;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError("expected an object", path);
  return j;
}

// Every key must be in `required` or `optional`, and every required key present.
void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  require_object(j, path);
  for (const char* key : required) {
    if (!j.contains(key)) throw SchemaError("missing field", join(path, key));
  }
  for (const auto& [key, value] : j.items()) {
    const auto match = [&](const char* k) { return key == k; };
    if (std::none_of(required.begin(), required.end(), match) &&
        std::none_of(optional.begin(), optional.end(), match)) {
      throw SchemaError("unknown field", join(path, key));
    }
  }
}

double number(const json& j, const std::string& path, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw SchemaError("expected a number", join(path, key));
  return v.get<double>();
}

std::string text(const json& j, const std::string& path, const char* key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw SchemaError("expected a string", join(path, key));
  return v.get<std::string>();
}

// Runs a constructor, re-anchoring its ValidationError at `path`.
template <class F>
auto build(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const InvalidScheduleError&) {
    throw;
  } catch (const SchemaError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), path);
  }
}

DistributionSpec parse_distribution(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("kind")) throw SchemaError("missing field", join(path, "kind"));
  const std::string kind = text(j, path, "kind");
  if (kind == "exponential") {
    check_keys(j, path, {"kind", "rate"});
    return build(path, [&] { return DistributionSpec{Exponential(number(j, path, "rate"))}; });
  }
  if (kind == "lognormal") {
    check_keys(j, path, {"kind", "mu", "sigma"});
    return build(path, [&] {
      return DistributionSpec{LogNormal(number(j, path, "mu"), number(j, path, "sigma"))};
    });
  }
  if (kind == "weibull") {
    check_keys(j, path, {"kind", "scale", "shape"});
    return build(path, [&] {
      return DistributionSpec{Weibull(number(j, path, "scale"), number(j, path, "shape"))};
    });
  }
  if (kind == "gamma") {
    check_keys(j, path, {"kind", "scale", "shape"});
    return build(path, [&] {
      return DistributionSpec{Gamma(number(j, path, "scale"), number(j, path, "shape"))};
    });
  }
  if (kind == "deterministic") {
    check_keys(j, path, {"kind", "value"});
    return build(path,
                 [&] { return DistributionSpec{Deterministic(number(j, path, "value"))}; });
  }
  throw SchemaError("unknown distribution kind '" + kind + "'", join(path, "kind"));
}

json distribution_json(const DistributionSpec& dist) {
  return std::visit(
      overloaded{
          [](const Exponential& d) { return json{{"kind", "exponential"}, {"rate", d.rate}}; },
          [](const LogNormal& d) {
            return json{{"kind", "lognormal"}, {"mu", d.mu}, {"sigma", d.sigma}};
          },
          [](const Weibull& d) {
            return json{{"kind", "weibull"}, {"scale", d.scale}, {"shape", d.shape}};
          },
          [](const Gamma& d) {
            return json{{"kind", "gamma"}, {"scale", d.scale}, {"shape", d.shape}};
          },
          [](const Deterministic& d) { return json{{"kind", "deterministic"}, {"value", d.value}}; },
      },
      dist);
}

DamageModel parse_damage(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("kind")) throw SchemaError("missing field", join(path, "kind"));
  const std::string kind = text(j, path, "kind");
  if (kind == "iid") {
    check_keys(j, path, {"kind", "dist"});
    return IidDamage{parse_distribution(j.at("dist"), join(path, "dist"))};
  }
  if (kind == "independent_schedule") {
    check_keys(j, path, {"kind", "family", "base_scale", "shape", "progression"}, {"parameter"});
    ScheduleParameter parameter = ScheduleParameter::Scale;
    if (j.contains("parameter")) {
      const std::string name = text(j, path, "parameter");
      if (name == "rate") {
        parameter = ScheduleParameter::Rate;
      } else if (name != "scale") {
        throw SchemaError("unknown schedule parameter '" + name + "'", join(path, "parameter"));
      }
    }
    const std::string family_name = text(j, path, "family");
    ScheduleFamily family;
    if (family_name == "gamma") {
      family = ScheduleFamily::Gamma;
    } else if (family_name == "weibull") {
      family = ScheduleFamily::Weibull;
    } else {
      throw SchemaError("unknown schedule family '" + family_name + "'", join(path, "family"));
    }
    const std::string ppath = join(path, "progression");
    const json& pj = require_object(j.at("progression"), ppath);
    if (!pj.contains("kind")) throw SchemaError("missing field", join(ppath, "kind"));
    const std::string pkind = text(pj, ppath, "kind");
    Progression progression = ArithmeticProgression{0.0};
    if (pkind == "arithmetic") {
      check_keys(pj, ppath, {"kind", "step"});
      progression = ArithmeticProgression{number(pj, ppath, "step")};
    } else if (pkind == "geometric") {
      check_keys(pj, ppath, {"kind", "ratio"});
      progression = GeometricProgression{number(pj, ppath, "ratio")};
    } else {
      throw SchemaError("unknown progression kind '" + pkind + "'", join(ppath, "kind"));
    }
    DamageModel model = build(path, [&] {
      return IndependentSchedule(family, number(j, path, "base_scale"), number(j, path, "shape"),
                                 progression, parameter);
    });
    try {
      validate_damage_model(model, kScheduleCheckCap);
    } catch (const InvalidScheduleError& e) {
      throw ValidationError(e.what(), join(ppath, "step"));
    }
    return model;
  }
  if (kind == "dependent_additive") {
    check_keys(j, path, {"kind", "theta0", "theta"}, {"component"});
    ComponentForm form = ComponentForm::ShapeTheta;
    if (j.contains("component")) {
      const std::string c = text(j, path, "component");
      if (c == "shape_theta") {
        form = ComponentForm::ShapeTheta;
      } else if (c == "exponential_mean") {
        form = ComponentForm::ExponentialMean;
      } else {
        throw SchemaError("unknown component form '" + c + "'", join(path, "component"));
      }
    }
    return build(path, [&] {
      return DamageModel{
          DependentAdditive(number(j, path, "theta0"), number(j, path, "theta"), form)};
    });
  }
  throw SchemaError("unknown damage kind '" + kind + "'", join(path, "kind"));
}

json damage_json(const DamageModel& model) {
  return std::visit(
      overloaded{
          [](const IidDamage& m) { return json{{"kind", "iid"}, {"dist", distribution_json(m.dist)}}; },
          [](const IndependentSchedule& m) {
            json progression = std::visit(
                overloaded{
                    [](const ArithmeticProgression& p) {
                      return json{{"kind", "arithmetic"}, {"step", p.step}};
                    },
                    [](const GeometricProgression& p) {
                      return json{{"kind", "geometric"}, {"ratio", p.ratio}};
                    },
                },
                m.progression);
            json out{{"kind", "independent_schedule"},
                     {"family", m.family == ScheduleFamily::Gamma ? "gamma" : "weibull"},
                     {"base_scale", m.base_scale},
                     {"shape", m.shape},
                     {"progression", progression}};
            if (m.parameter == ScheduleParameter::Rate) out["parameter"] = "rate";
            return out;
          },
          [](const DependentAdditive& m) {
            return json{{"kind", "dependent_additive"},
                        {"theta0", m.theta0},
                        {"theta", m.theta},
                        {"component", m.form == ComponentForm::ShapeTheta ? "shape_theta"
                                                                          : "exponential_mean"}};
          },
      },
      model);
}

StrengthCurve parse_strength(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("kind")) throw SchemaError("missing field", join(path, "kind"));
  const std::string kind = text(j, path, "kind");
  if (kind == "constant") {
    check_keys(j, path, {"kind", "K"});
    return build(path, [&] { return StrengthCurve{ConstantStrength(number(j, path, "K"))}; });
  }
  if (kind == "linear") {
    check_keys(j, path, {"kind", "a", "b"});
    return build(path, [&] {
      return StrengthCurve{LinearStrength(number(j, path, "a"), number(j, path, "b"))};
    });
  }
  if (kind == "exponential_decay") {
    check_keys(j, path, {"kind", "A", "B"});
    return build(path, [&] {
      return StrengthCurve{ExponentialDecayStrength(number(j, path, "A"), number(j, path, "B"))};
    });
  }
  throw SchemaError("unknown strength kind '" + kind + "'", join(path, "kind"));
}

json strength_json(const StrengthCurve& curve) {
  return std::visit(
      overloaded{
          [](const ConstantStrength& c) { return json{{"kind", "constant"}, {"K", c.K}}; },
          [](const LinearStrength& c) { return json{{"kind", "linear"}, {"a", c.a}, {"b", c.b}}; },
          [](const ExponentialDecayStrength& c) {
            return json{{"kind", "exponential_decay"}, {"A", c.A}, {"B", c.B}};
          },
      },
      curve);
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

CostVector::CostVector(double c_T, double c_N, double c_Z, double c_K)
    : c_T(c_T), c_N(c_N), c_Z(c_Z), c_K(c_K) {
  const std::pair<const char*, double> all[] = {{"c_T", c_T}, {"c_N", c_N}, {"c_Z", c_Z}, {"c_K", c_K}};
  for (const auto& [name, value] : all) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError("cost must be a positive finite number", std::string("costs.") + name);
    }
  }
  if (!(c_K > std::max({c_T, c_N, c_Z}))) {
    throw ValidationError("failure cost must exceed every preventive cost", "costs.c_K");
  }
}

Scenario::Scenario(DistributionSpec inter_arrival, DamageModel damage, StrengthCurve strength,
                   CostVector costs, std::string label)
    : inter_arrival(std::move(inter_arrival)),
      damage(std::move(damage)),
      strength(std::move(strength)),
      costs(costs),
      label(std::move(label)) {
  const double mu = mean(this->inter_arrival);
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ValidationError("inter-arrival distribution must have a positive finite mean",
                          "inter_arrival");
  }
}

Scenario Scenario::with_costs(const CostVector& c) const {
  Scenario copy = *this;
  copy.costs = c;
  return copy;
}

std::vector<PolicyViolation> validate_policy(const Scenario& scenario, const Policy& policy) {
  std::vector<PolicyViolation> out;
  if (policy.empty()) {
    out.push_back({"policy", "empty policy: at least one of T, N, Z must be active"});
    return out;
  }
  if (policy.T && !(*policy.T > 0.0 && std::isfinite(*policy.T))) {
    out.push_back({"T", "planned time must be positive and finite"});
  }
  if (policy.N && *policy.N < 1) out.push_back({"N", "shock count must be at least 1"});
  if (policy.Z) {
    const double Z = *policy.Z;
    const double K0 = initial_strength(scenario.strength);
    if (!(Z > 0.0 && std::isfinite(Z))) {
      out.push_back({"Z", "damage level must be positive and finite"});
    } else if (Z > K0) {
      out.push_back({"Z", "Z = " + format_number(Z) + " exceeds the initial strength K(0) = " +
                              format_number(K0)});
    } else if (policy.T && *policy.T > 0.0) {
      const double KT = strength_at(scenario.strength, *policy.T);
      if (!level_admissible(Z, KT)) {
        out.push_back({"Z", "Z = " + format_number(Z) + " exceeds K(T) = " + format_number(KT)});
      }
    }
  }
  return out;
}

void require_valid_policy(const Scenario& scenario, const Policy& policy) {
  const auto violations = validate_policy(scenario, policy);
  if (!violations.empty()) {
    throw ValidationError(violations.front().message, "policy." + violations.front().field);
  }
}

Scenario load_scenario(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), "$");
  }
  check_keys(j, "", {"schema", "inter_arrival", "damage", "strength", "costs"},
             {"label", "optimizer", "numerics"});
  if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != kScenarioSchemaVersion) {
    throw SchemaError("unsupported schema version (expected 1)", "schema");
  }
  std::string label;
  if (j.contains("label")) label = text(j, "", "label");

  const json& cj = j.at("costs");
  check_keys(cj, "costs", {"c_T", "c_N", "c_Z", "c_K"});
  const CostVector costs(number(cj, "costs", "c_T"), number(cj, "costs", "c_N"),
                         number(cj, "costs", "c_Z"), number(cj, "costs", "c_K"));

  return Scenario(parse_distribution(j.at("inter_arrival"), "inter_arrival"),
                  parse_damage(j.at("damage"), "damage"), parse_strength(j.at("strength"), "strength"),
                  costs, label);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'", "$");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_scenario(buffer.str());
}

std::string dump_scenario(const Scenario& scenario) {
  json j;
  j["schema"] = kScenarioSchemaVersion;
  j["label"] = scenario.label;
  j["inter_arrival"] = distribution_json(scenario.inter_arrival);
  j["damage"] = damage_json(scenario.damage);
  j["strength"] = strength_json(scenario.strength);
  j["costs"] = {{"c_T", scenario.costs.c_T},
                {"c_N", scenario.costs.c_N},
                {"c_Z", scenario.costs.c_Z},
                {"c_K", scenario.costs.c_K}};
  return j.dump(2);
}

Policy parse_policy(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed policy JSON: ") + e.what(), "policy");
  }
  check_keys(j, "policy", {}, {"T", "N", "Z"});
  Policy p;
  if (j.contains("T") && !j.at("T").is_null()) p.T = number(j, "policy", "T");
  if (j.contains("N") && !j.at("N").is_null()) {
    const json& n = j.at("N");
    if (!n.is_number_integer() || n.get<long long>() < 1) {
      throw SchemaError("expected a positive integer", "policy.N");
    }
    p.N = static_cast<std::uint32_t>(n.get<long long>());
  }
  if (j.contains("Z") && !j.at("Z").is_null()) p.Z = number(j, "policy", "Z");
  return p;
}

std::string dump_policy(const Policy& policy) {
  json j;
  j["T"] = policy.T ? json(*policy.T) : json(nullptr);
  j["N"] = policy.N ? json(*policy.N) : json(nullptr);
  j["Z"] = policy.Z ? json(*policy.Z) : json(nullptr);
  return j.dump();
}

std::string describe(const Policy& policy) {
  std::ostringstream os;
  os.precision(6);
  os << "(T=";
  if (policy.T) os << *policy.T; else os << "inf";
  os << ", N=";
  if (policy.N) os << *policy.N; else os << "inf";
  os << ", Z=";
  if (policy.Z) os << *policy.Z; else os << "inf";
  os << ")";
  return os.str();
}

}  // namespace cumdamage
