#include "riarit/estimator.hpp"

#include <algorithm>

namespace riarit {

StudentEstimate::StudentEstimate(std::size_t kc_count, double alpha)
    : levels_(kc_count, 0.0), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("estimator alpha must lie in (0,1]");
  }
}

OutcomeReward StudentEstimate::observe(const CompetenceVector& required, bool correct) {
  OutcomeReward reward;
  reward.per_kc.assign(levels_.size(), 0.0);
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const double r = required[i] - levels_[i];
    if ((correct && r > 0.0) || (!correct && r < 0.0)) {
      levels_[i] = std::clamp(levels_[i] + alpha_ * r, 0.0, 1.0);
      reward.per_kc[i] = r;
      reward.total += r;
    }
  }
  return reward;
}

EstimateUpdate update(const StudentEstimate& estimate, const CompetenceVector& required,
                      bool correct) {
  EstimateUpdate out{estimate, {}};
  out.reward = out.estimate.observe(required, correct);
  return out;
}

} // namespace riarit
