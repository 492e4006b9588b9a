#pragma once

#include <string>
#include <vector>

#include "riarit/exercise.hpp"
#include "riarit/scenario.hpp"

namespace testing {

inline std::string config_path(const std::string& name) {
  return std::string(RIARIT_TEST_CONFIG_DIR) + "/" + name;
}

inline const riarit::Scenario& shipped_scenario() {
  static const riarit::Scenario s = riarit::load_scenario(config_path("scenario.json"));
  return s;
}

inline const riarit::Catalog& shipped_catalog() {
  static const riarit::Catalog c = riarit::load_catalog(config_path("catalog.json"));
  return c;
}

/// Activity from value ids in parameter order.
inline riarit::Activity act(const std::vector<std::string>& ids,
                            const riarit::Scenario& s = shipped_scenario()) {
  return s.space.make_activity(ids);
}

/// Fresh scratch directory under the build tree.
std::string scratch_dir(const std::string& name);

} // namespace testing
