#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "riarit/bandit.hpp"
#include "riarit/model.hpp"
#include "riarit/sequencer.hpp"

namespace riarit {

struct SessionRules {
  int max_exercises = 60;
  int trial_limit = 3;
  /// Session ends after this many successes on `mastery_parameter = mastery_value`.
  std::string mastery_parameter = "ExerciseType";
  std::string mastery_value = "6";
  int mastery_successes = 3;
  /// Optional wall-clock cap; off when unset.
  std::optional<double> wall_clock_minutes;

  bool operator==(const SessionRules&) const = default;
};

/// Everything a didactician authors for one teaching scenario. Immutable after
/// load and safe to share between sessions.
struct Scenario {
  std::string id;
  std::vector<KnowledgeComponent> kcs;
  ParameterSpace space;
  QTable q_table;
  std::vector<PrerequisiteConstraint> constraints;
  StageTable stages;
  RiaritParams riarit;
  std::vector<std::int64_t> denominations;  // cents, ascending
  SessionRules session;

  std::size_t kc_count() const { return kcs.size(); }
  std::size_t kc_index(std::string_view id) const;
};

/// Parses and validates a scenario document. Errors carry `source:line:`.
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const Scenario& scenario);

/// Semantic checks beyond parsing (constraint reachability etc.); empty when valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Directory of the configuration files shipped with the sources.
std::string default_config_dir();

/// Default scenario file shipped with the sources, overridable by RIARIT_SCENARIO.
std::string default_scenario_path();

/// q_i(a) for every activity, indexed by ParameterSpace::flat_index.
std::vector<CompetenceVector> required_competence_table(const Scenario& scenario);

} // namespace riarit
