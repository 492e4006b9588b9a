#include "riarit/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <unordered_set>

#include "riarit/json_locator.hpp"

#ifndef RIARIT_DEFAULT_CONFIG_DIR
#define RIARIT_DEFAULT_CONFIG_DIR "config"
#endif

namespace riarit {

using nlohmann::json;
using Pointer = json::json_pointer;

namespace {

class ScenarioReader {
public:
  ScenarioReader(std::string_view text, std::string source)
      : source_(std::move(source)), doc_(parse_json_document(text, source_)), locator_(text) {}

  Scenario read() {
    Scenario s;
    const Pointer root;
    require_object(root);
    s.id = string_at(root / "id");
    read_kcs(s);
    read_parameters(s);
    read_q_table(s);
    read_constraints(s);
    read_stages(s);
    read_teacher(s);
    read_denominations(s);
    read_session(s);

    // Reachability and other cross-section findings.
    const auto findings = check_constraints(s.constraints, s.q_table, s.space, s.kcs);
    if (!findings.empty()) {
      fail(root / "constraints", findings.front());
    }
    return s;
  }

private:
  [[noreturn]] void fail(const Pointer& at, const std::string& message) const {
    std::ostringstream msg;
    msg << source_ << ":" << locator_.line_of(at) << ": " << message;
    if (!at.empty()) {
      msg << " (at " << at.to_string() << ")";
    }
    throw ConfigError(msg.str());
  }

  const json& node(const Pointer& at) const {
    if (!doc_.contains(at)) {
      fail(at, "missing required field");
    }
    return doc_.at(at);
  }

  bool has(const Pointer& at) const { return doc_.contains(at) && !doc_.at(at).is_null(); }

  void require_object(const Pointer& at) const {
    if (!node(at).is_object()) {
      fail(at, "expected an object");
    }
  }

  const json& array_at(const Pointer& at) const {
    const json& v = node(at);
    if (!v.is_array()) {
      fail(at, "expected an array");
    }
    return v;
  }

  std::string string_at(const Pointer& at) const {
    const json& v = node(at);
    if (!v.is_string()) {
      fail(at, "expected a string");
    }
    return v.get<std::string>();
  }

  double number_at(const Pointer& at) const {
    const json& v = node(at);
    if (!v.is_number()) {
      fail(at, "expected a number");
    }
    return v.get<double>();
  }

  int int_at(const Pointer& at) const {
    const json& v = node(at);
    if (!v.is_number_integer()) {
      fail(at, "expected an integer");
    }
    return v.get<int>();
  }

  double number_or(const Pointer& at, double fallback) const {
    return has(at) ? number_at(at) : fallback;
  }

  std::size_t kc_index(const Scenario& s, const std::string& id, const Pointer& at) const {
    for (std::size_t i = 0; i < s.kcs.size(); ++i) {
      if (s.kcs[i].id == id) {
        return i;
      }
    }
    fail(at, "unknown knowledge component '" + id + "'");
  }

  std::size_t parameter_index(const Scenario& s, const std::string& id, const Pointer& at) const {
    if (auto j = s.space.find(id)) {
      return *j;
    }
    fail(at, "unknown parameter '" + id + "'");
  }

  std::size_t value_index(const Scenario& s, std::size_t j, const std::string& v,
                          const Pointer& at) const {
    if (auto k = s.space.find_value(j, v)) {
      return *k;
    }
    fail(at, "parameter '" + s.space[j].id + "' has no value '" + v + "'");
  }

  void read_kcs(Scenario& s) const {
    const Pointer at = Pointer() / "kcs";
    const json& list = array_at(at);
    if (list.empty()) {
      fail(at, "at least one knowledge component is required");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Pointer item = at / i;
      KnowledgeComponent kc;
      kc.id = string_at(item / "id");
      kc.name = has(item / "name") ? string_at(item / "name") : kc.id;
      if (!seen.insert(kc.id).second) {
        fail(item / "id", "duplicate knowledge component id '" + kc.id + "'");
      }
      s.kcs.push_back(std::move(kc));
    }
  }

  void read_parameters(Scenario& s) const {
    const Pointer at = Pointer() / "parameters";
    const json& list = array_at(at);
    if (list.empty()) {
      fail(at, "at least one activity parameter is required");
    }
    std::vector<Parameter> params;
    std::unordered_set<std::string> seen;
    for (std::size_t j = 0; j < list.size(); ++j) {
      const Pointer item = at / j;
      Parameter p;
      p.id = string_at(item / "id");
      if (!seen.insert(p.id).second) {
        fail(item / "id", "duplicate parameter id '" + p.id + "'");
      }
      if (has(item / "column")) {
        p.column = string_at(item / "column");
      }
      const json& values = array_at(item / "values");
      if (values.empty()) {
        fail(item / "values", "parameter '" + p.id + "' needs at least one value");
      }
      std::unordered_set<std::string> value_seen;
      for (std::size_t k = 0; k < values.size(); ++k) {
        std::string v = string_at(item / "values" / k);
        if (!value_seen.insert(v).second) {
          fail(item / "values" / k, "duplicate value '" + v + "' in parameter '" + p.id + "'");
        }
        p.values.push_back(std::move(v));
      }
      params.push_back(std::move(p));
    }
    s.space = ParameterSpace(std::move(params));
  }

  void read_q_table(Scenario& s) const {
    const Pointer at = Pointer() / "q_table";
    require_object(at);
    s.q_table = QTable(s.kcs.size(), s.space);
    for (auto it = doc_.at(at).begin(); it != doc_.at(at).end(); ++it) {
      kc_index(s, it.key(), at / it.key());
    }
    for (std::size_t i = 0; i < s.kcs.size(); ++i) {
      const Pointer kc_at = at / s.kcs[i].id;
      if (!doc_.contains(kc_at)) {
        fail(at, "q_table has no matrix for knowledge component '" + s.kcs[i].id + "'");
      }
      require_object(kc_at);
      for (auto it = doc_.at(kc_at).begin(); it != doc_.at(kc_at).end(); ++it) {
        parameter_index(s, it.key(), kc_at / it.key());
      }
      for (std::size_t j = 0; j < s.space.size(); ++j) {
        const Pointer row_at = kc_at / s.space[j].id;
        if (!doc_.contains(row_at)) {
          fail(kc_at, "q_table['" + s.kcs[i].id + "'] has no row for parameter '" +
                          s.space[j].id + "' (use null for not-applicable entries)");
        }
        const json& row = array_at(row_at);
        if (row.size() != s.space[j].values.size()) {
          std::ostringstream msg;
          msg << "q_table row (" << s.kcs[i].id << ", " << s.space[j].id << ") has "
              << row.size() << " entries, expected " << s.space[j].values.size();
          fail(row_at, msg.str());
        }
        for (std::size_t v = 0; v < row.size(); ++v) {
          const Pointer cell = row_at / v;
          if (row[v].is_null()) {
            s.q_table.set(i, j, v, QEntry::not_applicable());
            continue;
          }
          if (!row[v].is_number()) {
            fail(cell, "q_table entry must be a number or null");
          }
          const double level = row[v].get<double>();
          if (!(level >= 0.0 && level <= 1.0)) {
            std::ostringstream msg;
            msg << "q_table entry (" << s.kcs[i].id << ", " << s.space[j].id << ", "
                << s.space[j].values[v] << ") = " << level << " is outside [0,1]";
            fail(cell, msg.str());
          }
          s.q_table.set(i, j, v, QEntry::of(level));
        }
      }
    }
  }

  void read_constraints(Scenario& s) const {
    const Pointer at = Pointer() / "constraints";
    if (!has(at)) {
      return;
    }
    const json& list = array_at(at);
    for (std::size_t c = 0; c < list.size(); ++c) {
      const Pointer item = at / c;
      PrerequisiteConstraint gate;
      gate.parameter = parameter_index(s, string_at(item / "parameter"), item / "parameter");
      gate.value = value_index(s, gate.parameter, string_at(item / "value"), item / "value");
      const Pointer req_at = item / "requires";
      require_object(req_at);
      for (auto it = doc_.at(req_at).begin(); it != doc_.at(req_at).end(); ++it) {
        Requirement r;
        r.kc = kc_index(s, it.key(), req_at / it.key());
        r.min_level = number_at(req_at / it.key());
        if (!(r.min_level >= 0.0 && r.min_level <= 1.0)) {
          fail(req_at / it.key(), "constraint level for '" + it.key() + "' is outside [0,1]");
        }
        gate.requirements.push_back(r);
      }
      if (gate.value == 0 && !gate.requirements.empty()) {
        fail(item, "constraint on " + s.space[gate.parameter].id + "=" +
                       s.space[gate.parameter].values[0] +
                       ": the first value of a parameter must be unconstrained");
      }
      s.constraints.push_back(std::move(gate));
    }
  }

  void read_stages(Scenario& s) const {
    const Pointer at = Pointer() / "stages";
    const json& list = array_at(at);
    if (list.empty()) {
      fail(at, "the predefined sequence needs at least one stage");
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Pointer item = at / k;
      const Pointer values_at = item / "values";
      require_object(values_at);
      Stage stage;
      for (auto it = doc_.at(values_at).begin(); it != doc_.at(values_at).end(); ++it) {
        parameter_index(s, it.key(), values_at / it.key());
      }
      for (std::size_t j = 0; j < s.space.size(); ++j) {
        const Pointer v_at = values_at / s.space[j].id;
        const json& v = node(v_at);
        std::vector<std::size_t> options;
        if (v.is_string()) {
          options.push_back(value_index(s, j, v.get<std::string>(), v_at));
        } else if (v.is_array() && !v.empty()) {
          for (std::size_t o = 0; o < v.size(); ++o) {
            options.push_back(value_index(s, j, string_at(v_at / o), v_at / o));
          }
        } else {
          fail(v_at, "stage value must be a value id or a non-empty list of value ids");
        }
        stage.choices.push_back(std::move(options));
      }
      if (has(item / "advance")) {
        AdvanceRule rule;
        rule.successes = int_at(item / "advance" / "successes");
        rule.window = int_at(item / "advance" / "window");
        if (rule.window < 1 || rule.successes < 1 || rule.successes > rule.window) {
          fail(item / "advance", "advance rule needs 1 <= successes <= window");
        }
        stage.advance = rule;
      } else if (k + 1 < list.size()) {
        fail(item, "only the last stage may omit its advance rule");
      }
      s.stages.stages.push_back(std::move(stage));
    }
  }

  void read_teacher(Scenario& s) const {
    const Pointer at = Pointer() / "teacher" / "riarit";
    RiaritParams p;
    p.alpha = number_or(at / "alpha", p.alpha);
    p.beta = number_or(at / "beta", p.beta);
    p.eta = number_or(at / "eta", p.eta);
    p.gamma = number_or(at / "gamma", p.gamma);
    p.w_floor = number_or(at / "w_floor", p.w_floor);
    if (!(p.alpha > 0.0 && p.alpha <= 1.0)) {
      fail(at / "alpha", "alpha must lie in (0,1]");
    }
    if (!(p.beta > 0.0 && p.beta <= 1.0)) {
      fail(at / "beta", "beta must lie in (0,1]");
    }
    if (!(p.eta >= 0.0)) {
      fail(at / "eta", "eta must be non-negative");
    }
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) {
      fail(at / "gamma", "gamma must lie in [0,1]");
    }
    if (!(p.w_floor > 0.0)) {
      fail(at / "w_floor", "w_floor must be positive");
    }
    s.riarit = p;
  }

  void read_denominations(Scenario& s) const {
    const Pointer at = Pointer() / "denominations";
    if (!has(at)) {
      s.denominations = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000};
      return;
    }
    const json& list = array_at(at);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const int cents = int_at(at / k);
      if (cents <= 0) {
        fail(at / k, "denominations must be positive cent amounts");
      }
      s.denominations.push_back(cents);
    }
    std::sort(s.denominations.begin(), s.denominations.end());
    if (s.denominations.empty() || s.denominations.front() != 1) {
      fail(at, "denominations must include 1 cent so every price is composable");
    }
    s.denominations.erase(std::unique(s.denominations.begin(), s.denominations.end()),
                          s.denominations.end());
  }

  void read_session(Scenario& s) const {
    const Pointer at = Pointer() / "session";
    SessionRules r;
    if (has(at)) {
      if (has(at / "max_exercises")) r.max_exercises = int_at(at / "max_exercises");
      if (has(at / "trial_limit")) r.trial_limit = int_at(at / "trial_limit");
      if (has(at / "mastery_parameter")) r.mastery_parameter = string_at(at / "mastery_parameter");
      if (has(at / "mastery_value")) r.mastery_value = string_at(at / "mastery_value");
      if (has(at / "mastery_successes")) r.mastery_successes = int_at(at / "mastery_successes");
      if (has(at / "wall_clock_minutes")) r.wall_clock_minutes = number_at(at / "wall_clock_minutes");
    }
    if (r.max_exercises < 1 || r.trial_limit < 1 || r.mastery_successes < 1) {
      fail(at, "session limits must be positive");
    }
    if (auto j = s.space.find(r.mastery_parameter)) {
      value_index(s, *j, r.mastery_value, at / "mastery_value");
    } else {
      fail(at / "mastery_parameter", "unknown parameter '" + r.mastery_parameter + "'");
    }
    s.session = r;
  }

  std::string source_;
  json doc_;
  JsonLocator locator_;
};

} // namespace

std::size_t Scenario::kc_index(std::string_view kc_id) const {
  for (std::size_t i = 0; i < kcs.size(); ++i) {
    if (kcs[i].id == kc_id) {
      return i;
    }
  }
  throw ConfigError("unknown knowledge component '" + std::string(kc_id) + "'");
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  return ScenarioReader(text, source).read();
}

Scenario load_scenario(const std::string& path) {
  return parse_scenario(read_text_file(path), path);
}

json scenario_to_json(const Scenario& s) {
  json out;
  out["id"] = s.id;
  out["kcs"] = json::array();
  for (const auto& kc : s.kcs) {
    out["kcs"].push_back({{"id", kc.id}, {"name", kc.name}});
  }
  out["parameters"] = json::array();
  for (const auto& p : s.space.parameters()) {
    json jp = {{"id", p.id}, {"values", p.values}};
    if (!p.column.empty()) {
      jp["column"] = p.column;
    }
    out["parameters"].push_back(jp);
  }
  json q = json::object();
  for (std::size_t i = 0; i < s.kcs.size(); ++i) {
    json per_kc = json::object();
    for (std::size_t j = 0; j < s.space.size(); ++j) {
      json row = json::array();
      for (std::size_t v = 0; v < s.space[j].values.size(); ++v) {
        const QEntry& e = s.q_table.at(i, j, v);
        row.push_back(e.kind == QEntry::Kind::level ? json(e.level) : json(nullptr));
      }
      per_kc[s.space[j].id] = row;
    }
    q[s.kcs[i].id] = per_kc;
  }
  out["q_table"] = q;
  out["constraints"] = json::array();
  for (const auto& g : s.constraints) {
    json req = json::object();
    for (const auto& r : g.requirements) {
      req[s.kcs[r.kc].id] = r.min_level;
    }
    out["constraints"].push_back({{"parameter", s.space[g.parameter].id},
                                  {"value", s.space[g.parameter].values[g.value]},
                                  {"requires", req}});
  }
  out["stages"] = json::array();
  for (const auto& stage : s.stages.stages) {
    json values = json::object();
    for (std::size_t j = 0; j < s.space.size(); ++j) {
      const auto& options = stage.choices[j];
      if (options.size() == 1) {
        values[s.space[j].id] = s.space[j].values[options[0]];
      } else {
        json list = json::array();
        for (auto o : options) {
          list.push_back(s.space[j].values[o]);
        }
        values[s.space[j].id] = list;
      }
    }
    json js = {{"values", values}};
    js["advance"] = stage.advance ? json{{"successes", stage.advance->successes},
                                         {"window", stage.advance->window}}
                                  : json(nullptr);
    out["stages"].push_back(js);
  }
  out["teacher"]["riarit"] = {{"alpha", s.riarit.alpha},
                              {"beta", s.riarit.beta},
                              {"eta", s.riarit.eta},
                              {"gamma", s.riarit.gamma},
                              {"w_floor", s.riarit.w_floor}};
  out["denominations"] = s.denominations;
  json session = {{"max_exercises", s.session.max_exercises},
                  {"trial_limit", s.session.trial_limit},
                  {"mastery_parameter", s.session.mastery_parameter},
                  {"mastery_value", s.session.mastery_value},
                  {"mastery_successes", s.session.mastery_successes}};
  session["wall_clock_minutes"] =
      s.session.wall_clock_minutes ? json(*s.session.wall_clock_minutes) : json(nullptr);
  out["session"] = session;
  return out;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> findings =
      check_constraints(s.constraints, s.q_table, s.space, s.kcs);
  for (std::size_t i = 0; i < s.kcs.size(); ++i) {
    for (std::size_t j = 0; j < s.space.size(); ++j) {
      for (std::size_t v = 0; v < s.space[j].values.size(); ++v) {
        const QEntry& e = s.q_table.at(i, j, v);
        const std::string triple =
            "(" + s.kcs[i].id + ", " + s.space[j].id + ", " + s.space[j].values[v] + ")";
        if (e.kind == QEntry::Kind::missing) {
          findings.push_back("q_table entry " + triple + " is missing");
        } else if (e.kind == QEntry::Kind::level && !(e.level >= 0.0 && e.level <= 1.0)) {
          findings.push_back("q_table entry " + triple + " is outside [0,1]");
        }
      }
    }
  }
  for (std::size_t k = 0; k < s.stages.stages.size(); ++k) {
    const Stage& stage = s.stages.stages[k];
    if (stage.choices.size() != s.space.size()) {
      findings.push_back("stage " + std::to_string(k + 1) + " does not fix every parameter");
    }
  }
  return findings;
}

std::string default_config_dir() { return RIARIT_DEFAULT_CONFIG_DIR; }

std::string default_scenario_path() {
  if (const char* env = std::getenv("RIARIT_SCENARIO"); env != nullptr && *env != '\0') {
    return env;
  }
  return (std::filesystem::path(RIARIT_DEFAULT_CONFIG_DIR) / "scenario.json").string();
}

std::vector<CompetenceVector> required_competence_table(const Scenario& scenario) {
  std::vector<CompetenceVector> out;
  out.reserve(scenario.space.activity_count());
  for (const auto& a : scenario.space.all_activities()) {
    out.push_back(required_competence(scenario.q_table, a));
  }
  return out;
}

} // namespace riarit
