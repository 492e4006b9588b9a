#include "riarit/sequencer.hpp"

#include <algorithm>

namespace riarit {

Activity next_activity(const StageProgress& progress, const StageTable& table, Rng& rng) {
  const Stage& stage = table.stages.at(static_cast<std::size_t>(progress.stage - 1));
  Activity a;
  a.values.reserve(stage.choices.size());
  for (const auto& options : stage.choices) {
    if (options.size() == 1) {
      a.values.push_back(options.front());
    } else {
      a.values.push_back(options[rng.below(options.size())]);
    }
  }
  return a;
}

bool rule_met(const AdvanceRule& rule, const std::vector<bool>& history) {
  const auto window = static_cast<std::size_t>(rule.window);
  if (history.size() < window) {
    return false;
  }
  const auto wins = std::count(history.end() - static_cast<std::ptrdiff_t>(window),
                               history.end(), true);
  return wins >= rule.successes;
}

StageProgress advance(StageProgress progress, bool correct, const StageTable& table) {
  const Stage& stage = table.stages.at(static_cast<std::size_t>(progress.stage - 1));
  progress.history.push_back(correct);
  if (stage.advance && rule_met(*stage.advance, progress.history) &&
      progress.stage < static_cast<int>(table.stages.size())) {
    ++progress.stage;
    progress.history.clear();
  }
  return progress;
}

} // namespace riarit
