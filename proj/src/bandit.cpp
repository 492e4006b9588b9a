#include "riarit/bandit.hpp"

#include <algorithm>

namespace riarit {

BanditFilter::BanditFilter(const ParameterSpace& space, RiaritParams params) : params_(params) {
  if (!(params.beta > 0.0 && params.beta <= 1.0)) {
    throw ConfigError("teacher.riarit.beta must lie in (0,1]");
  }
  if (!(params.eta >= 0.0)) {
    throw ConfigError("teacher.riarit.eta must be non-negative");
  }
  if (!(params.gamma >= 0.0 && params.gamma <= 1.0)) {
    throw ConfigError("teacher.riarit.gamma must lie in [0,1]");
  }
  if (!(params.w_floor > 0.0)) {
    throw ConfigError("teacher.riarit.w_floor must be positive");
  }
  for (const auto& p : space.parameters()) {
    const double n = static_cast<double>(p.values.size());
    weights_.emplace_back(p.values.size(), 1.0 / n);
  }
}

void BanditFilter::set_weights(std::size_t parameter, std::vector<double> w) {
  if (w.size() != weights_.at(parameter).size()) {
    throw std::invalid_argument("weight vector size mismatch");
  }
  weights_[parameter] = std::move(w);
}

std::vector<double> BanditFilter::probabilities(std::size_t parameter,
                                                const ValueMask& mask) const {
  const auto& w = weights_.at(parameter);
  std::vector<double> p(w.size(), 0.0);
  double total = 0.0;
  std::size_t allowed = 0;
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (mask.allows(parameter, v)) {
      total += w[v];
      ++allowed;
    }
  }
  if (allowed == 0) {
    throw InvariantViolation("every value of parameter #" + std::to_string(parameter) +
                             " is masked");
  }
  const double explore = params_.gamma / static_cast<double>(allowed);
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (!mask.allows(parameter, v)) {
      continue;
    }
    // Weights are floored above zero, so total > 0 whenever a value is allowed.
    const double greedy = total > 0.0 ? w[v] / total : 1.0 / static_cast<double>(allowed);
    p[v] = (1.0 - params_.gamma) * greedy + explore;
  }
  return p;
}

Activity BanditFilter::sample(const ValueMask& mask, Rng& rng) const {
  Activity a;
  a.values.reserve(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    const auto p = probabilities(j, mask);
    a.values.push_back(rng.categorical(p));
  }
  return a;
}

void BanditFilter::update(const Activity& a, double reward) {
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    double& w = weights_[j].at(a.values.at(j));
    w = std::max(params_.w_floor, params_.beta * w + params_.eta * reward);
  }
}

} // namespace riarit
