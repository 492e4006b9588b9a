#pragma once

#include <optional>

#include "riarit/model.hpp"
#include "riarit/rng.hpp"

namespace riarit {

/// Advance once at least `successes` of the last `window` outcomes succeeded,
/// counting only outcomes recorded in the current stage. "Two consecutive
/// successes" is {2, 2}; "3 out of 4" is {3, 4}.
struct AdvanceRule {
  int successes = 2;
  int window = 2;

  bool operator==(const AdvanceRule&) const = default;
};

struct Stage {
  /// Candidate values per parameter; more than one means a fair per-exercise
  /// pick (the "RT" money type).
  std::vector<std::vector<std::size_t>> choices;
  /// nullopt for the terminal stage.
  std::optional<AdvanceRule> advance;

  bool operator==(const Stage&) const = default;
};

struct StageTable {
  std::vector<Stage> stages;

  bool operator==(const StageTable&) const = default;
};

struct StageProgress {
  int stage = 1;  // 1-based
  std::vector<bool> history;

  bool operator==(const StageProgress&) const = default;
};

/// Current stage's parameter vector; multi-valued entries draw from `rng`.
Activity next_activity(const StageProgress& progress, const StageTable& table, Rng& rng);

StageProgress advance(StageProgress progress, bool correct, const StageTable& table);

bool rule_met(const AdvanceRule& rule, const std::vector<bool>& history);

} // namespace riarit
