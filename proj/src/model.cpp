#include "riarit/model.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace riarit {

ParameterSpace::ParameterSpace(std::vector<Parameter> parameters)
    : parameters_(std::move(parameters)) {
  std::unordered_set<std::string> ids;
  for (const auto& p : parameters_) {
    if (!ids.insert(p.id).second) {
      throw ConfigError("duplicate parameter id '" + p.id + "'");
    }
    if (p.values.empty()) {
      throw ConfigError("parameter '" + p.id + "' has no values");
    }
    std::unordered_set<std::string> values;
    for (const auto& v : p.values) {
      if (!values.insert(v).second) {
        throw ConfigError("parameter '" + p.id + "' repeats value '" + v + "'");
      }
    }
  }
}

std::optional<std::size_t> ParameterSpace::find(std::string_view id) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (parameters_[i].id == id) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ParameterSpace::index_of(std::string_view id) const {
  if (auto i = find(id)) {
    return *i;
  }
  throw ConfigError("unknown parameter '" + std::string(id) + "'");
}

std::optional<std::size_t> ParameterSpace::find_value(std::size_t parameter,
                                                      std::string_view value) const {
  const auto& values = parameters_.at(parameter).values;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t ParameterSpace::value_index(std::size_t parameter, std::string_view value) const {
  if (auto i = find_value(parameter, value)) {
    return *i;
  }
  throw ConfigError("parameter '" + parameters_.at(parameter).id + "' has no value '" +
                    std::string(value) + "'");
}

bool ParameterSpace::contains(const Activity& a) const {
  if (a.values.size() != parameters_.size()) {
    return false;
  }
  for (std::size_t j = 0; j < parameters_.size(); ++j) {
    if (a.values[j] >= parameters_[j].values.size()) {
      return false;
    }
  }
  return true;
}

std::size_t ParameterSpace::activity_count() const {
  std::size_t n = parameters_.empty() ? 0 : 1;
  for (const auto& p : parameters_) {
    n *= p.values.size();
  }
  return n;
}

std::size_t ParameterSpace::flat_index(const Activity& a) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < parameters_.size(); ++j) {
    flat = flat * parameters_[j].values.size() + a.values[j];
  }
  return flat;
}

Activity ParameterSpace::activity_at(std::size_t flat) const {
  Activity a;
  a.values.resize(parameters_.size());
  for (std::size_t j = parameters_.size(); j-- > 0;) {
    const std::size_t n = parameters_[j].values.size();
    a.values[j] = flat % n;
    flat /= n;
  }
  return a;
}

std::vector<Activity> ParameterSpace::all_activities() const {
  std::vector<Activity> out;
  const std::size_t n = activity_count();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(activity_at(i));
  }
  return out;
}

Activity ParameterSpace::make_activity(const std::vector<std::string>& value_ids) const {
  if (value_ids.size() != parameters_.size()) {
    throw ConfigError("activity needs one value per parameter");
  }
  Activity a;
  for (std::size_t j = 0; j < parameters_.size(); ++j) {
    a.values.push_back(value_index(j, value_ids[j]));
  }
  return a;
}

std::vector<std::string> ParameterSpace::value_ids(const Activity& a) const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < parameters_.size(); ++j) {
    out.push_back(parameters_[j].values.at(a.values.at(j)));
  }
  return out;
}

QTable::QTable(std::size_t kc_count, const ParameterSpace& space) : kc_count_(kc_count) {
  for (const auto& p : space.parameters()) {
    offsets_.push_back(stride_);
    stride_ += p.values.size();
  }
  offsets_.push_back(stride_);
  entries_.assign(kc_count_ * stride_, QEntry{});
}

std::size_t QTable::cell(std::size_t kc, std::size_t parameter, std::size_t value) const {
  if (kc >= kc_count_ || parameter + 1 >= offsets_.size() ||
      offsets_[parameter] + value >= offsets_[parameter + 1]) {
    throw std::out_of_range("QTable index out of range");
  }
  return kc * stride_ + offsets_[parameter] + value;
}

const QEntry& QTable::at(std::size_t kc, std::size_t parameter, std::size_t value) const {
  return entries_[cell(kc, parameter, value)];
}

void QTable::set(std::size_t kc, std::size_t parameter, std::size_t value, QEntry entry) {
  entries_[cell(kc, parameter, value)] = entry;
}

CompetenceVector required_competence(const QTable& table, const Activity& a) {
  CompetenceVector q(table.kc_count(), 1.0);
  for (std::size_t i = 0; i < table.kc_count(); ++i) {
    for (std::size_t j = 0; j < a.values.size(); ++j) {
      const QEntry& e = table.at(i, j, a.values[j]);
      switch (e.kind) {
        case QEntry::Kind::level:
          q[i] *= e.level;
          break;
        case QEntry::Kind::not_applicable:
          break;
        case QEntry::Kind::missing: {
          std::ostringstream msg;
          msg << "Q-table has no entry for KC #" << i << ", parameter #" << j << ", value #"
              << a.values[j];
          throw ConfigError(msg.str());
        }
      }
    }
  }
  return q;
}

ValueMask::ValueMask(const ParameterSpace& space) {
  for (const auto& p : space.parameters()) {
    allowed_.emplace_back(p.values.size(), std::uint8_t{1});
  }
}

std::size_t ValueMask::allowed_count(std::size_t parameter) const {
  return static_cast<std::size_t>(
      std::count(allowed_[parameter].begin(), allowed_[parameter].end(), std::uint8_t{1}));
}

bool ValueMask::allows(const Activity& a) const {
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    if (!allows(j, a.values[j])) {
      return false;
    }
  }
  return true;
}

ValueMask allowed_values(const std::vector<PrerequisiteConstraint>& constraints,
                         const CompetenceVector& c, const ParameterSpace& space) {
  ValueMask mask(space);
  for (const auto& gate : constraints) {
    for (const auto& req : gate.requirements) {
      if (c[req.kc] < req.min_level) {
        mask.set(gate.parameter, gate.value, false);
        break;
      }
    }
  }
  return mask;
}

std::vector<std::string> check_constraints(const std::vector<PrerequisiteConstraint>& constraints,
                                           const QTable& table, const ParameterSpace& space,
                                           const std::vector<KnowledgeComponent>& kcs) {
  std::vector<std::string> findings;
  auto label = [&](const PrerequisiteConstraint& g) {
    if (g.parameter >= space.size() || g.value >= space[g.parameter].values.size()) {
      return std::string("<invalid>");
    }
    return space[g.parameter].id + "=" + space[g.parameter].values[g.value];
  };

  bool structurally_ok = true;
  for (const auto& g : constraints) {
    if (g.parameter >= space.size() || g.value >= space[g.parameter].values.size()) {
      findings.push_back("constraint gates a value outside the parameter space");
      structurally_ok = false;
      continue;
    }
    if (g.value == 0 && !g.requirements.empty()) {
      findings.push_back("constraint on " + label(g) + ": the first value of parameter '" +
                         space[g.parameter].id + "' must be unconstrained");
      structurally_ok = false;
    }
    for (const auto& r : g.requirements) {
      if (r.kc >= kcs.size()) {
        findings.push_back("constraint on " + label(g) + " references an unknown KC");
        structurally_ok = false;
      } else if (!(r.min_level >= 0.0 && r.min_level <= 1.0)) {
        std::ostringstream msg;
        msg << "constraint on " << label(g) << ": level " << r.min_level << " for "
            << kcs[r.kc].id << " is outside [0,1]";
        findings.push_back(msg.str());
        structurally_ok = false;
      }
    }
  }
  if (!structurally_ok) {
    return findings;
  }

  // Reachability fixed point: a value unlocks once every requirement is at most
  // the best q_i achievable with activities made of already unlocked values
  // (the estimate can never exceed that).
  std::vector<std::vector<bool>> reachable;
  std::vector<std::vector<std::vector<Requirement>>> value_needs(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    reachable.emplace_back(space[j].values.size(), true);
    value_needs[j].resize(space[j].values.size());
  }
  for (const auto& g : constraints) {
    auto& list = value_needs[g.parameter][g.value];
    list.insert(list.end(), g.requirements.begin(), g.requirements.end());
    if (!g.requirements.empty()) {
      reachable[g.parameter][g.value] = false;
    }
  }

  const auto activities = space.all_activities();
  std::vector<CompetenceVector> q_of;
  q_of.reserve(activities.size());
  for (const auto& a : activities) {
    q_of.push_back(required_competence(table, a));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    CompetenceVector best(kcs.size(), 0.0);
    for (std::size_t k = 0; k < activities.size(); ++k) {
      bool ok = true;
      for (std::size_t j = 0; j < space.size() && ok; ++j) {
        ok = reachable[j][activities[k][j]];
      }
      if (!ok) {
        continue;
      }
      for (std::size_t i = 0; i < kcs.size(); ++i) {
        best[i] = std::max(best[i], q_of[k][i]);
      }
    }
    for (std::size_t j = 0; j < space.size(); ++j) {
      for (std::size_t v = 0; v < space[j].values.size(); ++v) {
        if (reachable[j][v]) {
          continue;
        }
        bool met = true;
        for (const auto& r : value_needs[j][v]) {
          met = met && best[r.kc] >= r.min_level;
        }
        if (met) {
          reachable[j][v] = true;
          changed = true;
        }
      }
    }
  }
  for (std::size_t j = 0; j < space.size(); ++j) {
    for (std::size_t v = 0; v < space[j].values.size(); ++v) {
      if (!reachable[j][v]) {
        findings.push_back("value " + space[j].id + "=" + space[j].values[v] +
                           " can never be unlocked: its prerequisites exceed every competence "
                           "estimate reachable through earlier values");
      }
    }
  }
  return findings;
}

} // namespace riarit
