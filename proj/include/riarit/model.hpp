#pragma once

// Knowledge components, activity parameters and the factorized Q-table.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riarit {

/// Raised for malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Per-KC levels in [0,1].
using CompetenceVector = std::vector<double>;

struct KnowledgeComponent {
  std::string id;
  std::string name;
};

struct Parameter {
  std::string id;
  std::vector<std::string> values;
  /// Column name used in trace exports; empty means `id`.
  std::string column;

  const std::string& column_name() const { return column.empty() ? id : column; }
};

/// One value index per parameter, in ParameterSpace order.
struct Activity {
  std::vector<std::size_t> values;

  std::size_t operator[](std::size_t parameter) const { return values[parameter]; }
  bool operator==(const Activity&) const = default;
};

class ParameterSpace {
public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<Parameter> parameters);

  std::size_t size() const { return parameters_.size(); }
  const Parameter& operator[](std::size_t i) const { return parameters_[i]; }
  const std::vector<Parameter>& parameters() const { return parameters_; }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  std::optional<std::size_t> find_value(std::size_t parameter, std::string_view value) const;
  std::size_t value_index(std::size_t parameter, std::string_view value) const;

  bool contains(const Activity& a) const;

  /// Number of distinct activities (product of value counts).
  std::size_t activity_count() const;
  /// Mixed-radix index of an activity; the first parameter varies slowest.
  std::size_t flat_index(const Activity& a) const;
  Activity activity_at(std::size_t flat) const;
  std::vector<Activity> all_activities() const;

  /// Activity from value ids, e.g. {"1", "WS", "x€x", "Real"}.
  Activity make_activity(const std::vector<std::string>& value_ids) const;
  std::vector<std::string> value_ids(const Activity& a) const;

private:
  std::vector<Parameter> parameters_;
};

/// One cell of the Q-table. `missing` is a configuration gap and is an error
/// wherever it is read; `not_applicable` imposes no requirement.
struct QEntry {
  enum class Kind : std::uint8_t { missing, not_applicable, level };
  Kind kind = Kind::missing;
  double level = 1.0;

  static QEntry not_applicable() { return {Kind::not_applicable, 1.0}; }
  static QEntry of(double level) { return {Kind::level, level}; }
  bool operator==(const QEntry&) const = default;
};

/// Required competence q_i(parameter = value) for every (KC, parameter, value).
class QTable {
public:
  QTable() = default;
  QTable(std::size_t kc_count, const ParameterSpace& space);

  std::size_t kc_count() const { return kc_count_; }

  const QEntry& at(std::size_t kc, std::size_t parameter, std::size_t value) const;
  void set(std::size_t kc, std::size_t parameter, std::size_t value, QEntry entry);

  bool operator==(const QTable&) const = default;

private:
  std::size_t cell(std::size_t kc, std::size_t parameter, std::size_t value) const;

  std::size_t kc_count_ = 0;
  std::vector<std::size_t> offsets_;  // per parameter, start of its values
  std::size_t stride_ = 0;            // total values over all parameters
  std::vector<QEntry> entries_;
};

/// Product over parameters of q_i(a_j); not-applicable cells contribute 1.
/// Throws ConfigError on a missing cell.
CompetenceVector required_competence(const QTable& table, const Activity& a);

struct Requirement {
  std::size_t kc = 0;
  double min_level = 0.0;
};

/// Gates one parameter value behind minimum estimated competences.
struct PrerequisiteConstraint {
  std::size_t parameter = 0;
  std::size_t value = 0;
  std::vector<Requirement> requirements;
};

/// Allowed values per parameter.
class ValueMask {
public:
  ValueMask() = default;
  /// Everything allowed.
  explicit ValueMask(const ParameterSpace& space);

  bool allows(std::size_t parameter, std::size_t value) const {
    return allowed_[parameter][value] != 0;
  }
  void set(std::size_t parameter, std::size_t value, bool allowed) {
    allowed_[parameter][value] = allowed ? 1 : 0;
  }
  std::size_t allowed_count(std::size_t parameter) const;
  std::size_t parameter_count() const { return allowed_.size(); }
  std::size_t value_count(std::size_t parameter) const { return allowed_[parameter].size(); }
  bool allows(const Activity& a) const;

  bool operator==(const ValueMask&) const = default;

private:
  std::vector<std::vector<std::uint8_t>> allowed_;
};

/// Values whose every requirement satisfies c[kc] >= min (inclusive).
ValueMask allowed_values(const std::vector<PrerequisiteConstraint>& constraints,
                         const CompetenceVector& c, const ParameterSpace& space);

/// Structural checks on the constraint set: references in range, levels in
/// [0,1], first value of every parameter unconstrained, and every gated value
/// reachable by activities built from values that are themselves reachable.
/// Returns human-readable findings; empty means valid.
std::vector<std::string> check_constraints(const std::vector<PrerequisiteConstraint>& constraints,
                                           const QTable& table, const ParameterSpace& space,
                                           const std::vector<KnowledgeComponent>& kcs);

} // namespace riarit
