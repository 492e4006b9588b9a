#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "riarit/experiment.hpp"
#include "support.hpp"

using namespace riarit;
using testing::config_path;
using testing::shipped_scenario;

namespace {

const PopulationSpec& q_population() {
  static const PopulationSpec p = load_population(config_path("population_q.json"), shipped_scenario());
  return p;
}

ExperimentConfig small(TeacherKind teacher, int students, int steps, bool learn) {
  ExperimentConfig c;
  c.teacher = teacher;
  c.n_students = students;
  c.n_steps = steps;
  c.students_learn = learn;
  c.seed = 11;
  return c;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("one student one step") {
  const auto f = run_experiment(shipped_scenario(), q_population(),
                                small(TeacherKind::predefined, 1, 1, false));
  REQUIRE(f.rows() == 1);
  CHECK(f.step[0] == 1);
  CHECK(f.value(0, 0) == 0);
  CHECK(f.steps == std::vector<int>{1});
  std::ostringstream csv;
  write_trace_csv(f, csv);
  CHECK(count_lines(csv.str()) == 2);
  CHECK(csv.str().rfind("run,student,step,teacher,ex_type,", 0) == 0);
}

TEST_CASE("workers do not change results") {
  for (const auto teacher : {TeacherKind::riarit, TeacherKind::predefined}) {
    auto c = small(teacher, 25, 30, true);
    c.n_runs = 2;
    const auto one = run_experiment(shipped_scenario(), q_population(), c);
    c.workers = 4;
    const auto four = run_experiment(shipped_scenario(), q_population(), c);
    CHECK(one.activity == four.activity);
    CHECK(one.correct == four.correct);
    CHECK(one.c_est == four.c_est);
    CHECK(one.c_true == four.c_true);
    CHECK(one.reward == four.reward);
    c.seed = 12;
    const auto other = run_experiment(shipped_scenario(), q_population(), c);
    CHECK(other.correct != one.correct);
  }
}

TEST_CASE("row invariants") {
  auto c = small(TeacherKind::riarit, 20, 50, true);
  const auto f = run_experiment(shipped_scenario(), q_population(), c);
  CHECK(f.rows() == 20 * 50);
  for (std::size_t u = 0; u < f.unit_count(); ++u) {
    int errors = 0;
    for (std::size_t k = 0; k < f.steps.size(); ++k) {
      const std::size_t r = f.row_index(u, k);
      errors += f.correct[r] ? 0 : 1;
      CHECK(f.cum_err[r] == errors);
      for (std::size_t i = 0; i < f.kc_count(); ++i) {
        CHECK(f.est(r, i) >= 0.0);
        CHECK(f.est(r, i) <= 1.0);
        if (k > 0) {
          CHECK(f.truth(r, i) >= f.truth(f.row_index(u, k - 1), i));
        }
      }
      if (f.reward[r] > 0) {
        CHECK(f.correct[r] == 1);
      }
      if (f.reward[r] < 0) {
        CHECK(f.correct[r] == 0);
      }
    }
  }
}

TEST_CASE("no learning keeps the ceiling") {
  PopulationSpec p = q_population();
  p.ceiling_stddev.assign(p.ceiling_stddev.size(), 0.0);
  p.ceiling_mean.assign(p.ceiling_mean.size(), 0.8);
  auto c = small(TeacherKind::riarit, 10, 20, false);
  const auto f = run_experiment(shipped_scenario(), p, c);
  for (double v : f.c_true) {
    CHECK(v == 0.8);
  }
  const auto tables = summarize(f, {1, 20});
  const auto& q = tables.at("competence_quantiles");
  for (const auto& row : q.rows) {
    if (row[2] == "true") {
      for (std::size_t j = 3; j < row.size(); ++j) {
        CHECK(std::stod(row[j]) == doctest::Approx(0.8).epsilon(1e-12));
      }
    }
  }
  CHECK(q.rows.size() == 2 * 6 * 2);
}

TEST_CASE("record stride") {
  auto c = small(TeacherKind::predefined, 3, 25, true);
  c.record_every = 10;
  const auto f = run_experiment(shipped_scenario(), q_population(), c);
  CHECK(f.steps == std::vector<int>{10, 20, 25});
  CHECK(f.rows() == 9);
  CHECK(f.recorded_index(20) == 1u);
  CHECK_FALSE(f.recorded_index(5));
}

TEST_CASE("always failing students") {
  PopulationSpec p = q_population();
  p.model.gamma_thresh = 0.99;
  auto c = small(TeacherKind::predefined, 5, 12, true);
  const auto f = run_experiment(shipped_scenario(), p, c);
  for (std::size_t r = 0; r < f.rows(); ++r) {
    CHECK(f.correct[r] == 0);
    CHECK(f.cum_err[r] == f.step[r]);
    // predefined never leaves stage 1 without successes
    CHECK(f.value(r, 0) == 0);
  }
  const auto tables = summarize(f);
  const auto& errs = tables.at("cumulative_errors");
  REQUIRE(errs.rows.size() == 12);
  CHECK(errs.rows.back()[1] == "12");
  CHECK(errs.rows.back()[2] == "12");
  const auto& reach = tables.at("max_level");
  CHECK(reach.rows[0][1] == "1");
  CHECK(reach.rows[0][2] == "0");
  CHECK(tables.count("profiles") == 0);
}

TEST_CASE("summary tables") {
  auto c = small(TeacherKind::riarit, 30, 40, false);
  const auto f = run_experiment(shipped_scenario(), q_population(), c);
  const auto tables = summarize(f, {1, 10, 40});
  for (const char* name : {"exercise_type_distribution", "competence_quantiles",
                           "estimation_distance", "cumulative_errors", "max_level"}) {
    CHECK(tables.count(name) == 1);
  }
  const auto& dist = tables.at("exercise_type_distribution");
  CHECK(dist.rows.size() == 40 * 6);
  for (int s = 0; s < 40; ++s) {
    double total = 0;
    for (int v = 0; v < 6; ++v) {
      total += std::stod(dist.rows[std::size_t(s * 6 + v)][2]);
    }
    CHECK(total == doctest::Approx(1.0));
  }
  CHECK(tables.at("competence_quantiles").rows.size() == 3 * 6 * 2);
}

TEST_CASE("P population profiles") {
  const auto p = load_population(config_path("population_p.json"), shipped_scenario());
  auto c = small(TeacherKind::riarit, 40, 10, false);
  const auto f = run_experiment(shipped_scenario(), p, c);
  const auto tables = summarize(f);
  REQUIRE(tables.count("profiles") == 1);
  CHECK(tables.at("profiles").header.front() == "profile");
}

TEST_CASE("trace quoting") {
  auto c = small(TeacherKind::riarit, 40, 20, false);
  const auto f = run_experiment(shipped_scenario(), q_population(), c);
  std::ostringstream csv;
  write_trace_csv(f, csv);
  CHECK(count_lines(csv.str()) == f.rows() + 1);
  bool any_comma = false;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    any_comma = any_comma || f.value(r, 2) == 1;
  }
  if (any_comma) {
    CHECK(csv.str().find(",\"x,x€\",") != std::string::npos);
  }
}

TEST_CASE("compare") {
  auto c = small(TeacherKind::riarit, 30, 15, true);
  const auto a = run_experiment(shipped_scenario(), q_population(), c);
  const auto self = compare(a, a, 200);
  for (const auto& row : self.rows) {
    CHECK(row.mean_diff() == 0.0);
    CHECK(row.ci.low == 0.0);
    CHECK(row.ci.high == 0.0);
  }
  auto b = a;
  for (auto& v : b.c_true) {
    v += 0.1;
  }
  const auto shifted = compare(a, b, 200);
  CHECK(shifted.find("true", "KnowMoney").mean_diff() == doctest::Approx(0.1));
  CHECK(shifted.find("mean_true").mean_diff() == doctest::Approx(0.1));
  CHECK(shifted.find("true", "Memory").paired.p_greater < 1e-6);
  CHECK(shifted.find("estimated", "Memory").mean_diff() == 0.0);
  CHECK(shifted.per_kc_table().rows.size() == 6);

  auto d = small(TeacherKind::riarit, 31, 15, true);
  const auto other = run_experiment(shipped_scenario(), q_population(), d);
  CHECK_THROWS_AS(compare(a, other), std::invalid_argument);
}

TEST_CASE("experiment files") {
  for (const char* name : {"exp_q_nolearn.json", "exp_q_learn.json", "exp_p_nolearn.json",
                           "exp_p_learn.json"}) {
    const auto c = load_experiment_config(config_path(std::string("experiments/") + name));
    CHECK(std::filesystem::exists(c.scenario_path));
    CHECK(std::filesystem::exists(c.population_path));
    CHECK(c.n_runs == 20);
    CHECK(c.n_students == 1000);
    CHECK_NOTHROW(validate_experiment_config(c));
  }
  ExperimentConfig bad;
  bad.n_steps = 0;
  CHECK_THROWS(validate_experiment_config(bad));
}

} // TEST_SUITE
