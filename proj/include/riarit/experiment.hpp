#pragma once

// Batch simulations of virtual students under either teacher, with
// deterministic per-student random streams and flat tabular export.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riarit/scenario.hpp"
#include "riarit/stats.hpp"
#include "riarit/students.hpp"
#include "riarit/teacher.hpp"

namespace riarit {

struct ExperimentConfig {
  std::string name = "experiment";
  std::string scenario_path;
  std::string population_path;
  TeacherKind teacher = TeacherKind::riarit;
  bool students_learn = false;
  /// P students also learn to read parameter values (off: comprehension fixed).
  bool comprehension_learns = false;
  int n_students = 1000;
  int n_steps = 40;
  int n_runs = 1;
  std::uint64_t seed = 1;
  /// Keep one row every `record_every` steps (the last step is always kept).
  int record_every = 1;
  std::string out_dir = "out";
  int workers = 1;
  /// Steps at which summary quantiles are reported; empty means {1, n_steps}.
  std::vector<int> checkpoints;
};

/// Reads an experiment file; relative paths resolve against its directory.
ExperimentConfig load_experiment_config(const std::string& path);
void validate_experiment_config(const ExperimentConfig& config);

/// One row per (run, student, recorded step), stored column-wise.
class MetricsFrame {
public:
  std::string teacher;
  std::vector<std::string> kc_ids;
  std::vector<std::string> parameter_columns;
  std::vector<std::vector<std::string>> parameter_values;
  int n_runs = 0;
  int n_students = 0;
  int n_steps = 0;
  std::vector<int> steps;  // recorded step numbers, 1-based

  std::vector<std::int32_t> run, student, step;
  std::vector<std::uint8_t> activity;  // parameter_count() per row
  std::vector<std::uint8_t> correct;
  std::vector<double> reward;
  std::vector<double> c_est;   // kc_count() per row
  std::vector<double> c_true;  // kc_count() per row
  std::vector<std::int32_t> cum_err;

  /// Per (run, student): profile name and highest proposed / succeeded value
  /// of the first parameter over all steps (-1 when none).
  std::vector<std::string> profile;
  std::vector<int> max_proposed;
  std::vector<int> max_succeeded;

  std::size_t rows() const { return run.size(); }
  std::size_t kc_count() const { return kc_ids.size(); }
  std::size_t parameter_count() const { return parameter_columns.size(); }
  std::size_t unit_count() const {
    return static_cast<std::size_t>(n_runs) * static_cast<std::size_t>(n_students);
  }
  std::size_t row_index(std::size_t unit, std::size_t recorded) const {
    return unit * steps.size() + recorded;
  }
  /// Position of `step_number` in `steps`, if recorded.
  std::optional<std::size_t> recorded_index(int step_number) const;

  double est(std::size_t row, std::size_t kc) const { return c_est[row * kc_count() + kc]; }
  double truth(std::size_t row, std::size_t kc) const { return c_true[row * kc_count() + kc]; }
  std::size_t value(std::size_t row, std::size_t parameter) const {
    return activity[row * parameter_count() + parameter];
  }

  /// Column of per-unit values at a recorded step.
  std::vector<double> est_at(int step_number, std::size_t kc) const;
  std::vector<double> truth_at(int step_number, std::size_t kc) const;
  std::vector<double> cum_err_at(int step_number) const;
  /// Mean over KCs of |est - true| per unit.
  std::vector<double> distance_at(int step_number) const;
  /// Mean over KCs of true competence per unit.
  std::vector<double> mean_truth_at(int step_number) const;
};

/// Simulates every (run, student) pair. Results do not depend on `workers`.
MetricsFrame run_experiment(const Scenario& scenario, const PopulationSpec& population,
                            const ExperimentConfig& config);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const CsvTable& table, std::ostream& out);
void write_trace_csv(const MetricsFrame& frame, std::ostream& out);
std::string format_number(double x);

/// Plot-ready tables keyed by name (file name is summary_<name>.csv).
std::map<std::string, CsvTable> summarize(const MetricsFrame& frame,
                                          const std::vector<int>& checkpoints = {});

struct MetricComparison {
  std::string metric;
  std::string kc;  // empty for scalar metrics
  double mean_a = 0.0;
  double mean_b = 0.0;
  stats::Interval ci;  // bootstrap CI of mean(b - a)
  stats::TestResult welch;
  stats::TestResult paired;

  double mean_diff() const { return mean_b - mean_a; }
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  std::vector<MetricComparison> rows;

  const MetricComparison& find(const std::string& metric, const std::string& kc = {}) const;
  /// One row per KC with final estimated and true competence comparisons.
  CsvTable per_kc_table() const;
  CsvTable overall_table() const;
};

/// Final-step comparison of two frames over the same units (b relative to a).
/// Throws std::invalid_argument on shape mismatch.
ComparisonReport compare(const MetricsFrame& a, const MetricsFrame& b, int resamples = 1000,
                         std::uint64_t seed = 7);

} // namespace riarit
