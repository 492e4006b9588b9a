#include "riarit/students.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "riarit/json_locator.hpp"
#include "riarit/scenario.hpp"

namespace riarit {

double kc_success_prob(const StudentModelParams& model, double level, double required) {
  return std::atan(model.beta_s * (level - required + model.alpha_s)) / std::numbers::pi + 0.5;
}

double q_success_prob(const QStudent& student, const CompetenceVector& required) {
  const std::size_t n = student.level.size();
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = kc_success_prob(student.model, student.level[i], required[i]);
    if (p <= 0.0) {
      return 0.0;
    }
    log_sum += std::log(p);
  }
  const double geo = std::exp(log_sum / static_cast<double>(n));
  return geo < student.model.gamma_thresh ? 0.0 : geo;
}

QStudent q_learn(QStudent student, const CompetenceVector& required) {
  for (std::size_t i = 0; i < student.level.size(); ++i) {
    double& c = student.level[i];
    if (student.model.no_forgetting && !(required[i] > c)) {
      continue;
    }
    c = std::min(c + student.speed[i] * (required[i] - c), student.ceiling[i]);
    c = std::clamp(c, 0.0, 1.0);
  }
  return student;
}

double p_success_prob(const PStudent& student, const Activity& a,
                      const CompetenceVector& required) {
  const double pq = q_success_prob(student.base, required);
  if (pq == 0.0 || student.comprehension.empty()) {
    return pq;
  }
  double product = 1.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    product *= student.comprehension[j][a.values[j]];
  }
  if (product <= 0.0) {
    return 0.0;
  }
  return pq * std::pow(product, 1.0 / static_cast<double>(a.values.size()));
}

void learn_comprehension(PStudent& student, const Activity& a) {
  for (std::size_t j = 0; j < a.values.size() && j < student.comprehension.size(); ++j) {
    double& p = student.comprehension[j][a.values[j]];
    p += student.comprehension_speed[j] * (1.0 - p);
  }
}

PStudent p_learn(PStudent student, const Activity& a, const CompetenceVector& required) {
  learn_comprehension(student, a);
  student.base = q_learn(std::move(student.base), required);
  return student;
}

double success_prob(const VirtualStudent& student, const Activity& a,
                    const CompetenceVector& required) {
  if (const auto* p = std::get_if<PStudent>(&student)) {
    return p_success_prob(*p, a, required);
  }
  return q_success_prob(std::get<QStudent>(student), required);
}

const QStudent& base_of(const VirtualStudent& student) {
  if (const auto* p = std::get_if<PStudent>(&student)) {
    return p->base;
  }
  return std::get<QStudent>(student);
}

QStudent& base_of(VirtualStudent& student) {
  if (auto* p = std::get_if<PStudent>(&student)) {
    return p->base;
  }
  return std::get<QStudent>(student);
}

void validate_population(const PopulationSpec& spec, std::size_t kc_count) {
  if (spec.size < 1) {
    throw ConfigError("population size must be at least 1");
  }
  if (spec.ceiling_mean.size() != kc_count || spec.ceiling_stddev.size() != kc_count) {
    throw ConfigError("population ceiling mean/stddev need one entry per KC");
  }
  if (!(spec.ceiling_min >= 0.0 && spec.ceiling_min <= spec.ceiling_max &&
        spec.ceiling_max <= 1.0)) {
    throw ConfigError("population ceiling bounds must satisfy 0 <= min <= max <= 1");
  }
  for (double sd : spec.ceiling_stddev) {
    if (!(sd >= 0.0)) {
      throw ConfigError("population ceiling stddev must be non-negative");
    }
  }
  if (!(spec.speed_min > 0.0 && spec.speed_min <= spec.speed_max && spec.speed_max <= 1.0)) {
    throw ConfigError("learning speed range must satisfy 0 < min <= max <= 1");
  }
  if (!(spec.comprehension_speed_min >= 0.0 &&
        spec.comprehension_speed_min <= spec.comprehension_speed_max &&
        spec.comprehension_speed_max <= 1.0)) {
    throw ConfigError("comprehension speed range must satisfy 0 <= min <= max <= 1");
  }
  if (!(spec.model.gamma_thresh >= 0.0 && spec.model.gamma_thresh <= 1.0)) {
    throw ConfigError("gamma_thresh must lie in [0,1]");
  }
  if (spec.kind == PopulationSpec::Kind::p) {
    if (spec.profiles.empty()) {
      throw ConfigError("a P population needs at least one profile");
    }
    double total = 0.0;
    for (const auto& profile : spec.profiles) {
      if (!(profile.weight >= 0.0)) {
        throw ConfigError("profile '" + profile.name + "' has a negative weight");
      }
      for (const auto& o : profile.overrides) {
        if (!(o.level >= 0.0 && o.level <= 1.0)) {
          throw ConfigError("profile '" + profile.name + "' has comprehension outside [0,1]");
        }
      }
      total += profile.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("profile weights must sum to 1");
    }
  }
}

namespace {

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (sd == 0.0) {
    return std::clamp(mean, lo, hi);
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = rng.normal(mean, sd);
    if (x >= lo && x <= hi) {
      return x;
    }
  }
  return std::clamp(mean, lo, hi);
}

} // namespace

std::vector<VirtualStudent> sample_population(const PopulationSpec& spec,
                                              const ParameterSpace& space, Rng& rng) {
  validate_population(spec, spec.ceiling_mean.size());
  const std::size_t n_kc = spec.ceiling_mean.size();
  std::vector<double> weights;
  for (const auto& profile : spec.profiles) {
    weights.push_back(profile.weight);
  }
  std::vector<VirtualStudent> out;
  out.reserve(static_cast<std::size_t>(spec.size));
  for (int s = 0; s < spec.size; ++s) {
    QStudent q;
    q.model = spec.model;
    q.level.assign(n_kc, 0.0);
    for (std::size_t i = 0; i < n_kc; ++i) {
      q.ceiling.push_back(truncated_normal(rng, spec.ceiling_mean[i], spec.ceiling_stddev[i],
                                           spec.ceiling_min, spec.ceiling_max));
    }
    for (std::size_t i = 0; i < n_kc; ++i) {
      q.speed.push_back(spec.speed_min + (spec.speed_max - spec.speed_min) * rng.uniform());
    }
    if (spec.kind == PopulationSpec::Kind::q) {
      out.emplace_back(std::move(q));
      continue;
    }
    PStudent p;
    p.base = std::move(q);
    const Profile& profile = spec.profiles[rng.categorical(weights)];
    p.profile = profile.name;
    for (const auto& param : space.parameters()) {
      p.comprehension.emplace_back(param.values.size(), 1.0);
      p.comprehension_speed.push_back(
          spec.comprehension_speed_min +
          (spec.comprehension_speed_max - spec.comprehension_speed_min) * rng.uniform());
    }
    for (const auto& o : profile.overrides) {
      p.comprehension.at(o.parameter).at(o.value) = o.level;
    }
    out.emplace_back(std::move(p));
  }
  return out;
}

PopulationSpec parse_population(std::string_view text, const Scenario& scenario,
                                const std::string& source) {
  using nlohmann::json;
  const json doc = parse_json_document(text, source);
  const JsonLocator locator(text);
  auto fail = [&](const json::json_pointer& at, const std::string& message) {
    throw ConfigError(source + ":" + std::to_string(locator.line_of(at)) + ": " + message);
  };
  const std::size_t n_kc = scenario.kc_count();

  PopulationSpec spec;
  try {
    const std::string kind = doc.value("kind", "Q");
    if (kind == "Q" || kind == "q") {
      spec.kind = PopulationSpec::Kind::q;
    } else if (kind == "P" || kind == "p") {
      spec.kind = PopulationSpec::Kind::p;
    } else {
      fail(json::json_pointer("/kind"), "population kind must be Q or P");
    }
    spec.size = doc.value("size", spec.size);

    auto per_kc = [&](const json& node, const json::json_pointer& at, double fallback) {
      CompetenceVector out(n_kc, fallback);
      if (node.is_number()) {
        std::fill(out.begin(), out.end(), node.get<double>());
      } else if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          std::size_t i = 0;
          try {
            i = scenario.kc_index(it.key());
          } catch (const ConfigError&) {
            fail(at / it.key(), "unknown knowledge component '" + it.key() + "'");
          }
          out[i] = it.value().get<double>();
        }
      } else if (!node.is_null()) {
        fail(at, "expected a number or a per-KC object");
      }
      return out;
    };

    const json ceiling = doc.value("ceiling", json::object());
    const json::json_pointer c_at("/ceiling");
    spec.ceiling_mean = per_kc(ceiling.value("mean", json(0.85)), c_at / "mean", 0.85);
    spec.ceiling_stddev = per_kc(ceiling.value("stddev", json(0.15)), c_at / "stddev", 0.15);
    spec.ceiling_min = ceiling.value("min", spec.ceiling_min);
    spec.ceiling_max = ceiling.value("max", spec.ceiling_max);

    const json speed = doc.value("speed", json::object());
    spec.speed_min = speed.value("min", spec.speed_min);
    spec.speed_max = speed.value("max", spec.speed_max);
    const json cspeed = doc.value("comprehension_speed", json::object());
    spec.comprehension_speed_min = cspeed.value("min", spec.comprehension_speed_min);
    spec.comprehension_speed_max = cspeed.value("max", spec.comprehension_speed_max);

    const json model = doc.value("model", json::object());
    spec.model.alpha_s = model.value("alpha_s", spec.model.alpha_s);
    spec.model.beta_s = model.value("beta_s", spec.model.beta_s);
    spec.model.gamma_thresh = model.value("gamma_thresh", spec.model.gamma_thresh);
    spec.model.no_forgetting = model.value("no_forgetting", spec.model.no_forgetting);
    spec.model.learn_on_success_only =
        model.value("learn_on_success_only", spec.model.learn_on_success_only);

    if (doc.contains("profiles")) {
      const auto& profiles = doc.at("profiles");
      for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto at = json::json_pointer("/profiles") / k;
        const auto& jp = profiles[k];
        Profile profile;
        profile.name = jp.at("name").get<std::string>();
        profile.weight = jp.at("weight").get<double>();
        const json comp = jp.value("comprehension", json::object());
        for (auto pit = comp.begin(); pit != comp.end(); ++pit) {
          const auto param = scenario.space.find(pit.key());
          if (!param) {
            fail(at / "comprehension" / pit.key(), "unknown parameter '" + pit.key() + "'");
          }
          for (auto vit = pit.value().begin(); vit != pit.value().end(); ++vit) {
            const auto value = scenario.space.find_value(*param, vit.key());
            if (!value) {
              fail(at / "comprehension" / pit.key() / vit.key(),
                   "parameter '" + pit.key() + "' has no value '" + vit.key() + "'");
            }
            profile.overrides.push_back({*param, *value, vit.value().get<double>()});
          }
        }
        spec.profiles.push_back(std::move(profile));
      }
    }
  } catch (const json::exception& e) {
    fail(json::json_pointer(), std::string("malformed population: ") + e.what());
  }
  try {
    validate_population(spec, n_kc);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return spec;
}

PopulationSpec load_population(const std::string& path, const Scenario& scenario) {
  return parse_population(read_text_file(path), scenario, path);
}

} // namespace riarit
