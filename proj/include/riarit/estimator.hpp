#pragma once

#include "riarit/model.hpp"

namespace riarit {

/// Learning-progress signal of one exercise outcome.
struct OutcomeReward {
  double total = 0.0;
  /// Applied r_i per KC, 0 where the gate did not fire.
  std::vector<double> per_kc;
};

/// Estimated competence of one student, starting at zero.
class StudentEstimate {
public:
  StudentEstimate() = default;
  StudentEstimate(std::size_t kc_count, double alpha);

  const CompetenceVector& levels() const { return levels_; }
  double alpha() const { return alpha_; }

  /// In-place update. For each KC, r_i = q_i - c_i is applied (c_i += alpha r_i)
  /// only on a success with r_i > 0 or a failure with r_i < 0.
  OutcomeReward observe(const CompetenceVector& required, bool correct);

  bool operator==(const StudentEstimate&) const = default;

private:
  CompetenceVector levels_;
  double alpha_ = 0.6;
};

struct EstimateUpdate {
  StudentEstimate estimate;
  OutcomeReward reward;
};

EstimateUpdate update(const StudentEstimate& estimate, const CompetenceVector& required,
                      bool correct);

} // namespace riarit
