#pragma once

// Virtual students: competence-limited (Q) and additionally
// representation-limited (P) populations.

#include <string>
#include <variant>
#include <vector>

#include "riarit/model.hpp"
#include "riarit/rng.hpp"

namespace riarit {

struct StudentModelParams {
  double alpha_s = 0.1;        // offset inside the arctan curve
  double beta_s = 5.0;         // slope of the arctan curve
  double gamma_thresh = 0.1;   // success probability below this becomes 0
  /// Learn only when the exercise demands more than the current level.
  bool no_forgetting = true;
  bool learn_on_success_only = false;

  bool operator==(const StudentModelParams&) const = default;
};

struct QStudent {
  CompetenceVector level;    // true competence
  CompetenceVector ceiling;  // per-KC maximum
  std::vector<double> speed; // per-KC learning speed
  StudentModelParams model;

  bool operator==(const QStudent&) const = default;
};

struct PStudent {
  QStudent base;
  /// comprehension[parameter][value] in [0,1].
  std::vector<std::vector<double>> comprehension;
  /// Per-parameter comprehension learning speed.
  std::vector<double> comprehension_speed;
  std::string profile;

  bool operator==(const PStudent&) const = default;
};

using VirtualStudent = std::variant<QStudent, PStudent>;

/// Per-KC arctan success curve.
double kc_success_prob(const StudentModelParams& model, double level, double required);

/// Geometric mean of per-KC probabilities, zeroed below gamma_thresh.
double q_success_prob(const QStudent& student, const CompetenceVector& required);

/// level += speed * (required - level), capped at the ceiling.
QStudent q_learn(QStudent student, const CompetenceVector& required);

/// q_success_prob times the geometric mean of the chosen values' comprehension.
double p_success_prob(const PStudent& student, const Activity& a, const CompetenceVector& required);

/// Chosen values' comprehension moves toward 1; also learns competences.
PStudent p_learn(PStudent student, const Activity& a, const CompetenceVector& required);

/// Comprehension-only part of p_learn.
void learn_comprehension(PStudent& student, const Activity& a);

double success_prob(const VirtualStudent& student, const Activity& a,
                    const CompetenceVector& required);
const QStudent& base_of(const VirtualStudent& student);
QStudent& base_of(VirtualStudent& student);

struct ComprehensionOverride {
  std::size_t parameter = 0;
  std::size_t value = 0;
  double level = 1.0;
};

struct Profile {
  std::string name;
  double weight = 0.0;
  std::vector<ComprehensionOverride> overrides;  // everything else is 1
};

struct PopulationSpec {
  enum class Kind { q, p };
  Kind kind = Kind::q;
  int size = 1000;
  CompetenceVector ceiling_mean;     // per KC
  CompetenceVector ceiling_stddev;   // per KC
  double ceiling_min = 0.1;
  double ceiling_max = 1.0;
  double speed_min = 0.05;
  double speed_max = 0.5;
  double comprehension_speed_min = 0.05;
  double comprehension_speed_max = 0.5;
  StudentModelParams model;
  std::vector<Profile> profiles;  // P populations only
};

/// Throws ConfigError on invalid distribution parameters.
void validate_population(const PopulationSpec& spec, std::size_t kc_count);

/// `size` students with zero true competence.
std::vector<VirtualStudent> sample_population(const PopulationSpec& spec,
                                              const ParameterSpace& space, Rng& rng);

struct Scenario;

/// Reads a population file. `kc_count` and `space` resolve per-KC lists and
/// profile overrides.
PopulationSpec parse_population(std::string_view text, const Scenario& scenario,
                                const std::string& source = "<population>");
PopulationSpec load_population(const std::string& path, const Scenario& scenario);

} // namespace riarit
