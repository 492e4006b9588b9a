#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "riarit/bandit.hpp"
#include "riarit/sequencer.hpp"

namespace riarit {

struct Scenario;

enum class TeacherKind { riarit, predefined };

std::string_view to_string(TeacherKind kind);
TeacherKind parse_teacher_kind(std::string_view text);

/// Either the bandit teacher or the expert stage sequence, behind one
/// propose/observe interface.
class Teacher {
public:
  Teacher() = default;
  Teacher(TeacherKind kind, const Scenario& scenario);

  TeacherKind kind() const;

  /// `estimate` feeds the prerequisite mask of the bandit teacher.
  Activity propose(const Scenario& scenario, const CompetenceVector& estimate, Rng& rng) const;

  void observe(const Scenario& scenario, const Activity& a, bool correct, double reward);

  const BanditFilter* filter() const { return std::get_if<BanditFilter>(&state_); }
  const StageProgress* progress() const { return std::get_if<StageProgress>(&state_); }

  bool operator==(const Teacher&) const = default;

private:
  std::variant<BanditFilter, StageProgress> state_;
};

} // namespace riarit
