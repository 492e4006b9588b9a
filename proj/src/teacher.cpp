#include "riarit/teacher.hpp"

#include "riarit/scenario.hpp"

namespace riarit {

std::string_view to_string(TeacherKind kind) {
  return kind == TeacherKind::riarit ? "riarit" : "predefined";
}

TeacherKind parse_teacher_kind(std::string_view text) {
  if (text == "riarit" || text == "RiARiT") {
    return TeacherKind::riarit;
  }
  if (text == "predefined" || text == "Predefined") {
    return TeacherKind::predefined;
  }
  throw ConfigError("unknown teacher '" + std::string(text) + "' (expected riarit|predefined)");
}

Teacher::Teacher(TeacherKind kind, const Scenario& scenario) {
  if (kind == TeacherKind::riarit) {
    state_ = BanditFilter(scenario.space, scenario.riarit);
  } else {
    state_ = StageProgress{};
  }
}

TeacherKind Teacher::kind() const {
  return std::holds_alternative<BanditFilter>(state_) ? TeacherKind::riarit
                                                      : TeacherKind::predefined;
}

Activity Teacher::propose(const Scenario& scenario, const CompetenceVector& estimate,
                          Rng& rng) const {
  if (const auto* filter = std::get_if<BanditFilter>(&state_)) {
    const ValueMask mask = allowed_values(scenario.constraints, estimate, scenario.space);
    return filter->sample(mask, rng);
  }
  return next_activity(std::get<StageProgress>(state_), scenario.stages, rng);
}

void Teacher::observe(const Scenario& scenario, const Activity& a, bool correct, double reward) {
  if (auto* filter = std::get_if<BanditFilter>(&state_)) {
    filter->update(a, reward);
  } else {
    auto& progress = std::get<StageProgress>(state_);
    progress = advance(std::move(progress), correct, scenario.stages);
  }
}

} // namespace riarit
