#include "riarit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "riarit/estimator.hpp"
#include "riarit/json_locator.hpp"

namespace riarit {

namespace fs = std::filesystem;

ExperimentConfig load_experiment_config(const std::string& path) {
  using nlohmann::json;
  const std::string text = read_text_file(path);
  const json doc = parse_json_document(text, path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) {
      return p;
    }
    return (base / p).lexically_normal().string();
  };

  ExperimentConfig c;
  try {
    c.name = doc.value("name", fs::path(path).stem().string());
    c.scenario_path = resolve(doc.value("scenario", std::string()));
    c.population_path = resolve(doc.value("population", std::string()));
    c.teacher = parse_teacher_kind(doc.value("teacher", std::string("riarit")));
    c.students_learn = doc.value("students_learn", c.students_learn);
    c.comprehension_learns = doc.value("comprehension_learns", c.comprehension_learns);
    c.n_students = doc.value("n_students", c.n_students);
    c.n_steps = doc.value("n_steps", c.n_steps);
    c.n_runs = doc.value("n_runs", c.n_runs);
    c.seed = doc.value("seed", c.seed);
    c.record_every = doc.value("record_every", c.record_every);
    c.out_dir = resolve(doc.value("out", c.out_dir));
    c.workers = doc.value("workers", c.workers);
    c.checkpoints = doc.value("checkpoints", c.checkpoints);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed experiment: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  try {
    validate_experiment_config(c);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

void validate_experiment_config(const ExperimentConfig& c) {
  if (c.n_students < 1 || c.n_steps < 1 || c.n_runs < 1) {
    throw ConfigError("n_students, n_steps and n_runs must be at least 1");
  }
  if (c.record_every < 1) {
    throw ConfigError("record_every must be at least 1");
  }
  if (c.workers < 1) {
    throw ConfigError("workers must be at least 1");
  }
  for (int s : c.checkpoints) {
    if (s < 1 || s > c.n_steps) {
      throw ConfigError("checkpoint " + std::to_string(s) + " is outside [1, n_steps]");
    }
  }
}

std::optional<std::size_t> MetricsFrame::recorded_index(int step_number) const {
  const auto it = std::lower_bound(steps.begin(), steps.end(), step_number);
  if (it == steps.end() || *it != step_number) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - steps.begin());
}

namespace {

std::size_t require_step(const MetricsFrame& f, int step_number) {
  const auto k = f.recorded_index(step_number);
  if (!k) {
    throw std::out_of_range("step " + std::to_string(step_number) + " was not recorded");
  }
  return *k;
}

template <class F>
std::vector<double> per_unit(const MetricsFrame& f, int step_number, F&& value) {
  const std::size_t k = require_step(f, step_number);
  std::vector<double> out(f.unit_count());
  for (std::size_t u = 0; u < out.size(); ++u) {
    out[u] = value(f.row_index(u, k));
  }
  return out;
}

} // namespace

std::vector<double> MetricsFrame::est_at(int step_number, std::size_t kc) const {
  return per_unit(*this, step_number, [&](std::size_t r) { return est(r, kc); });
}

std::vector<double> MetricsFrame::truth_at(int step_number, std::size_t kc) const {
  return per_unit(*this, step_number, [&](std::size_t r) { return truth(r, kc); });
}

std::vector<double> MetricsFrame::cum_err_at(int step_number) const {
  return per_unit(*this, step_number, [&](std::size_t r) { return double(cum_err[r]); });
}

std::vector<double> MetricsFrame::distance_at(int step_number) const {
  return per_unit(*this, step_number, [&](std::size_t r) {
    double d = 0.0;
    for (std::size_t i = 0; i < kc_count(); ++i) {
      d += std::abs(est(r, i) - truth(r, i));
    }
    return d / double(kc_count());
  });
}

std::vector<double> MetricsFrame::mean_truth_at(int step_number) const {
  return per_unit(*this, step_number, [&](std::size_t r) {
    double d = 0.0;
    for (std::size_t i = 0; i < kc_count(); ++i) {
      d += truth(r, i);
    }
    return d / double(kc_count());
  });
}

MetricsFrame run_experiment(const Scenario& scenario, const PopulationSpec& population,
                            const ExperimentConfig& config) {
  validate_experiment_config(config);
  const std::size_t n_kc = scenario.kc_count();
  const std::size_t n_param = scenario.space.size();
  validate_population(population, n_kc);

  MetricsFrame f;
  f.teacher = std::string(to_string(config.teacher));
  for (const auto& kc : scenario.kcs) {
    f.kc_ids.push_back(kc.id);
  }
  for (const auto& p : scenario.space.parameters()) {
    f.parameter_columns.push_back(p.column_name());
    f.parameter_values.push_back(p.values);
  }
  f.n_runs = config.n_runs;
  f.n_students = config.n_students;
  f.n_steps = config.n_steps;
  for (int s = 1; s <= config.n_steps; ++s) {
    if (s % config.record_every == 0 || s == config.n_steps) {
      f.steps.push_back(s);
    }
  }

  const std::size_t units = f.unit_count();
  const std::size_t per = f.steps.size();
  const std::size_t rows = units * per;
  f.run.resize(rows);
  f.student.resize(rows);
  f.step.resize(rows);
  f.activity.resize(rows * n_param);
  f.correct.resize(rows);
  f.reward.resize(rows);
  f.c_est.resize(rows * n_kc);
  f.c_true.resize(rows * n_kc);
  f.cum_err.resize(rows);
  f.profile.resize(units);
  f.max_proposed.assign(units, -1);
  f.max_succeeded.assign(units, -1);

  PopulationSpec spec = population;
  spec.size = config.n_students;
  std::vector<std::vector<VirtualStudent>> cohorts;
  cohorts.reserve(static_cast<std::size_t>(config.n_runs));
  for (int r = 0; r < config.n_runs; ++r) {
    Rng rng = Rng::derive(config.seed, {static_cast<std::uint64_t>(r), 0x706f70ULL});
    cohorts.push_back(sample_population(spec, scenario.space, rng));
  }

  const auto table = required_competence_table(scenario);

  auto simulate = [&](std::size_t unit) {
    const int r = static_cast<int>(unit / static_cast<std::size_t>(config.n_students));
    const int s = static_cast<int>(unit % static_cast<std::size_t>(config.n_students));
    VirtualStudent student = cohorts[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
    QStudent& base = base_of(student);
    if (!config.students_learn) {
      base.level = base.ceiling;
    }
    if (const auto* p = std::get_if<PStudent>(&student)) {
      f.profile[unit] = p->profile;
    }
    Rng rng = Rng::derive(config.seed, {static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(s), 1});
    Teacher teacher(config.teacher, scenario);
    StudentEstimate estimate(n_kc, scenario.riarit.alpha);
    int errors = 0;
    std::size_t k = 0;
    for (int step = 1; step <= config.n_steps; ++step) {
      const Activity a = teacher.propose(scenario, estimate.levels(), rng);
      const CompetenceVector& q = table[scenario.space.flat_index(a)];
      const bool correct = rng.uniform() < success_prob(student, a, q);
      const OutcomeReward reward = estimate.observe(q, correct);
      teacher.observe(scenario, a, correct, reward.total);
      if (config.students_learn && (correct || !base.model.learn_on_success_only)) {
        base = q_learn(std::move(base), q);
      }
      if (config.comprehension_learns) {
        if (auto* p = std::get_if<PStudent>(&student)) {
          learn_comprehension(*p, a);
        }
      }
      errors += correct ? 0 : 1;
      const int level = static_cast<int>(a.values[0]);
      f.max_proposed[unit] = std::max(f.max_proposed[unit], level);
      if (correct) {
        f.max_succeeded[unit] = std::max(f.max_succeeded[unit], level);
      }
      if (k < per && f.steps[k] == step) {
        const std::size_t row = f.row_index(unit, k);
        f.run[row] = r;
        f.student[row] = s;
        f.step[row] = step;
        for (std::size_t j = 0; j < n_param; ++j) {
          f.activity[row * n_param + j] = static_cast<std::uint8_t>(a.values[j]);
        }
        f.correct[row] = correct ? 1 : 0;
        f.reward[row] = reward.total;
        for (std::size_t i = 0; i < n_kc; ++i) {
          f.c_est[row * n_kc + i] = estimate.levels()[i];
          f.c_true[row * n_kc + i] = base.level[i];
        }
        f.cum_err[row] = errors;
        ++k;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), units);
  if (workers <= 1) {
    for (std::size_t u = 0; u < units; ++u) {
      simulate(u);
    }
    return f;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t u = next++; u < units; u = next++) {
          simulate(u);
        }
      } catch (...) {
        errors[w] = std::current_exception();
        next = units;
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return f;
}

std::string format_number(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

void write_field(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') {
      out << '"';
    }
    out << ch;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) {
      out << ',';
    }
    write_field(out, fields[i]);
  }
  out << '\n';
}

} // namespace

void write_csv(const CsvTable& table, std::ostream& out) {
  write_row(out, table.header);
  for (const auto& row : table.rows) {
    write_row(out, row);
  }
}

void write_trace_csv(const MetricsFrame& f, std::ostream& out) {
  std::vector<std::string> header{"run", "student", "step", "teacher"};
  for (const auto& c : f.parameter_columns) {
    header.push_back(c);
  }
  header.insert(header.end(), {"correct", "reward"});
  for (const auto& kc : f.kc_ids) {
    header.push_back("c_est_" + kc);
  }
  for (const auto& kc : f.kc_ids) {
    header.push_back("c_true_" + kc);
  }
  header.push_back("cum_err");
  write_row(out, header);

  std::vector<std::string> row;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    row.clear();
    row.push_back(std::to_string(f.run[r]));
    row.push_back(std::to_string(f.student[r]));
    row.push_back(std::to_string(f.step[r]));
    row.push_back(f.teacher);
    for (std::size_t j = 0; j < f.parameter_count(); ++j) {
      row.push_back(f.parameter_values[j][f.value(r, j)]);
    }
    row.push_back(f.correct[r] ? "1" : "0");
    row.push_back(format_number(f.reward[r]));
    for (std::size_t i = 0; i < f.kc_count(); ++i) {
      row.push_back(format_number(f.est(r, i)));
    }
    for (std::size_t i = 0; i < f.kc_count(); ++i) {
      row.push_back(format_number(f.truth(r, i)));
    }
    row.push_back(std::to_string(f.cum_err[r]));
    write_row(out, row);
  }
}

std::map<std::string, CsvTable> summarize(const MetricsFrame& f,
                                          const std::vector<int>& checkpoints) {
  std::map<std::string, CsvTable> out;
  const auto& levels = f.parameter_values.at(0);
  const std::string& level_col = f.parameter_columns.at(0);
  const double units = double(f.unit_count());

  CsvTable& dist = out["exercise_type_distribution"];
  dist.header = {"step", level_col, "share"};
  for (std::size_t k = 0; k < f.steps.size(); ++k) {
    std::vector<std::size_t> counts(levels.size(), 0);
    for (std::size_t u = 0; u < f.unit_count(); ++u) {
      ++counts[f.value(f.row_index(u, k), 0)];
    }
    for (std::size_t v = 0; v < levels.size(); ++v) {
      dist.rows.push_back({std::to_string(f.steps[k]), levels[v],
                           format_number(double(counts[v]) / units)});
    }
  }

  std::vector<int> marks = checkpoints;
  if (marks.empty()) {
    marks = {f.steps.front(), f.n_steps};
  }
  marks.erase(std::remove_if(marks.begin(), marks.end(),
                             [&](int s) { return !f.recorded_index(s); }),
              marks.end());
  CsvTable& quant = out["competence_quantiles"];
  quant.header = {"step", "kc", "kind", "min", "q1", "median", "q3", "max", "mean"};
  for (int s : marks) {
    for (std::size_t i = 0; i < f.kc_count(); ++i) {
      for (const bool estimated : {true, false}) {
        const auto xs = estimated ? f.est_at(s, i) : f.truth_at(s, i);
        const auto five = stats::five_number(xs);
        quant.rows.push_back({std::to_string(s), f.kc_ids[i], estimated ? "estimated" : "true",
                              format_number(five.min), format_number(five.q1),
                              format_number(five.median), format_number(five.q3),
                              format_number(five.max), format_number(stats::mean(xs))});
      }
    }
  }

  CsvTable& dist_err = out["estimation_distance"];
  dist_err.header = {"step", "mean", "stddev"};
  for (int s : f.steps) {
    const auto d = f.distance_at(s);
    dist_err.rows.push_back({std::to_string(s), format_number(stats::mean(d)),
                             format_number(d.size() > 1 ? std::sqrt(stats::variance(d)) : 0.0)});
  }

  // Errors by level are tallied over recorded rows only.
  CsvTable& errs = out["cumulative_errors"];
  errs.header = {"step", "all"};
  for (const auto& v : levels) {
    errs.header.push_back(level_col + "_" + v);
  }
  std::vector<std::vector<double>> by_level(f.unit_count(), std::vector<double>(levels.size()));
  for (std::size_t k = 0; k < f.steps.size(); ++k) {
    std::vector<double> sums(levels.size(), 0.0);
    double all = 0.0;
    for (std::size_t u = 0; u < f.unit_count(); ++u) {
      const std::size_t r = f.row_index(u, k);
      if (!f.correct[r]) {
        by_level[u][f.value(r, 0)] += 1.0;
      }
      for (std::size_t v = 0; v < levels.size(); ++v) {
        sums[v] += by_level[u][v];
      }
      all += f.cum_err[r];
    }
    std::vector<std::string> row{std::to_string(f.steps[k]), format_number(all / units)};
    for (double x : sums) {
      row.push_back(format_number(x / units));
    }
    errs.rows.push_back(std::move(row));
  }

  CsvTable& reach = out["max_level"];
  reach.header = {level_col, "share_proposed", "share_succeeded"};
  for (std::size_t v = 0; v < levels.size(); ++v) {
    const auto hits = [&](const std::vector<int>& xs) {
      return double(std::count(xs.begin(), xs.end(), int(v))) / units;
    };
    reach.rows.push_back({levels[v], format_number(hits(f.max_proposed)),
                          format_number(hits(f.max_succeeded))});
  }

  if (std::any_of(f.profile.begin(), f.profile.end(), [](const auto& p) { return !p.empty(); })) {
    CsvTable& prof = out["profiles"];
    prof.header = {"profile", "students", "kc", "estimated", "true"};
    std::vector<std::string> names(f.profile.begin(), f.profile.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    const std::size_t k = f.steps.size() - 1;
    for (const auto& name : names) {
      for (std::size_t i = 0; i < f.kc_count(); ++i) {
        double est = 0.0, tru = 0.0;
        std::size_t n = 0;
        for (std::size_t u = 0; u < f.unit_count(); ++u) {
          if (f.profile[u] != name) {
            continue;
          }
          const std::size_t r = f.row_index(u, k);
          est += f.est(r, i);
          tru += f.truth(r, i);
          ++n;
        }
        prof.rows.push_back({name, std::to_string(n), f.kc_ids[i], format_number(est / double(n)),
                             format_number(tru / double(n))});
      }
    }
  }
  return out;
}

const MetricComparison& ComparisonReport::find(const std::string& metric,
                                               const std::string& kc) const {
  for (const auto& row : rows) {
    if (row.metric == metric && row.kc == kc) {
      return row;
    }
  }
  throw std::out_of_range("no comparison row for " + metric + (kc.empty() ? "" : "/" + kc));
}

namespace {

std::vector<std::string> comparison_fields(const MetricComparison& m) {
  return {format_number(m.mean_a),           format_number(m.mean_b),
          format_number(m.mean_diff()),      format_number(m.ci.low),
          format_number(m.ci.high),          format_number(m.welch.p_greater),
          format_number(m.welch.p_less),     format_number(m.paired.p_greater),
          format_number(m.paired.p_less)};
}

const std::vector<std::string> kComparisonColumns = {
    "mean_a",        "mean_b",        "diff",           "ci_low",        "ci_high",
    "welch_p_greater", "welch_p_less", "paired_p_greater", "paired_p_less"};

} // namespace

CsvTable ComparisonReport::per_kc_table() const {
  // Wide layout: the estimated and true comparisons share one row per KC.
  std::vector<std::string> metrics;
  std::vector<std::string> kcs;
  for (const auto& m : rows) {
    if (m.kc.empty()) {
      continue;
    }
    if (std::find(metrics.begin(), metrics.end(), m.metric) == metrics.end()) {
      metrics.push_back(m.metric);
    }
    if (std::find(kcs.begin(), kcs.end(), m.kc) == kcs.end()) {
      kcs.push_back(m.kc);
    }
  }
  CsvTable t;
  t.header = {"kc"};
  for (const auto& metric : metrics) {
    for (const auto& col : kComparisonColumns) {
      t.header.push_back(metric + "_" + col);
    }
  }
  for (const auto& kc : kcs) {
    std::vector<std::string> row{kc};
    for (const auto& metric : metrics) {
      const auto fields = comparison_fields(find(metric, kc));
      row.insert(row.end(), fields.begin(), fields.end());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable ComparisonReport::overall_table() const {
  CsvTable t;
  t.header = {"metric"};
  t.header.insert(t.header.end(), kComparisonColumns.begin(), kComparisonColumns.end());
  for (const auto& m : rows) {
    if (!m.kc.empty()) {
      continue;
    }
    std::vector<std::string> row{m.metric};
    const auto fields = comparison_fields(m);
    row.insert(row.end(), fields.begin(), fields.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

ComparisonReport compare(const MetricsFrame& a, const MetricsFrame& b, int resamples,
                         std::uint64_t seed) {
  if (a.n_runs != b.n_runs || a.n_students != b.n_students || a.n_steps != b.n_steps ||
      a.kc_ids != b.kc_ids) {
    throw std::invalid_argument("frames differ in runs, students, steps or KCs");
  }
  ComparisonReport report;
  report.label_a = a.teacher;
  report.label_b = b.teacher;
  const int last = a.n_steps;
  std::uint64_t stream = 0;
  auto add = [&](std::string metric, std::string kc, const std::vector<double>& xa,
                 const std::vector<double>& xb) {
    MetricComparison m;
    m.metric = std::move(metric);
    m.kc = std::move(kc);
    m.mean_a = stats::mean(xa);
    m.mean_b = stats::mean(xb);
    m.welch = stats::welch_t_test(xa, xb);
    m.paired = stats::paired_t_test(xa, xb);
    m.ci = stats::bootstrap_paired_ci(xa, xb, resamples, 0.95, splitmix64(seed + stream++));
    report.rows.push_back(std::move(m));
  };
  for (std::size_t i = 0; i < a.kc_count(); ++i) {
    add("estimated", a.kc_ids[i], a.est_at(last, i), b.est_at(last, i));
    add("true", a.kc_ids[i], a.truth_at(last, i), b.truth_at(last, i));
  }
  add("mean_true", "", a.mean_truth_at(last), b.mean_truth_at(last));
  add("distance", "", a.distance_at(last), b.distance_at(last));
  add("cum_err", "", a.cum_err_at(last), b.cum_err_at(last));
  return report;
}

} // namespace riarit
