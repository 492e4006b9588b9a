#pragma once

#include "riarit/model.hpp"
#include "riarit/rng.hpp"

namespace riarit {

struct RiaritParams {
  double alpha = 0.6;    // estimator update rate
  double beta = 0.9;     // filter decay
  double eta = 0.5;      // filter gain
  double gamma = 0.1;    // uniform exploration share
  double w_floor = 1e-4;

  bool operator==(const RiaritParams&) const = default;
};

/// One reward-tracking filter per activity parameter. Each parameter is an
/// independent bandit over its values; an activity is one draw per parameter.
class BanditFilter {
public:
  BanditFilter() = default;
  BanditFilter(const ParameterSpace& space, RiaritParams params);

  const RiaritParams& params() const { return params_; }
  std::size_t parameter_count() const { return weights_.size(); }
  const std::vector<double>& weights(std::size_t parameter) const { return weights_[parameter]; }
  void set_weights(std::size_t parameter, std::vector<double> w);

  /// Sampling distribution of one parameter over all its values; masked values
  /// get 0 and the rest (1-gamma) * normalized weight + gamma / #allowed.
  std::vector<double> probabilities(std::size_t parameter, const ValueMask& mask) const;

  Activity sample(const ValueMask& mask, Rng& rng) const;

  /// w_j(a_j) <- max(w_floor, beta * w_j(a_j) + eta * r) for every parameter j.
  void update(const Activity& a, double reward);

  bool operator==(const BanditFilter&) const = default;

private:
  RiaritParams params_;
  std::vector<std::vector<double>> weights_;
};

/// Thrown when a sampling precondition (e.g. a fully masked parameter) fails.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace riarit
