// riarit: batch experiments, live session server and config validation.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "riarit/experiment.hpp"
#include "riarit/service.hpp"

namespace fs = std::filesystem;
using namespace riarit;

namespace {

struct SimulateFlags {
  std::string config;
  std::string scenario;
  std::string population;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> teacher;
  bool both = false;
  std::optional<int> students;
  std::optional<int> steps;
  std::optional<int> runs;
  std::optional<int> record_every;
};

struct ServeFlags {
  std::string scenario;
  std::string catalog;
  std::string data = "sessions";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string teacher = "riarit";
  std::string static_dir;
};

struct ValidateFlags {
  std::string scenario;
  std::string catalog;
  std::vector<std::string> configs;
  std::vector<std::string> populations;
};

std::string pick_scenario(const std::string& flag, const std::string& fallback = {}) {
  if (!flag.empty()) {
    return flag;
  }
  return fallback.empty() ? default_scenario_path() : fallback;
}

Scenario load_checked_scenario(const std::string& path) {
  Scenario s = load_scenario(path);
  const auto problems = validate_scenario(s);
  if (!problems.empty()) {
    std::string msg = path + ": scenario is invalid";
    for (const auto& p : problems) {
      msg += "\n  " + p;
    }
    throw ConfigError(msg);
  }
  return s;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  body(out);
  if (!out) {
    throw std::runtime_error("write to " + path.string() + " failed");
  }
}

void write_outputs(const MetricsFrame& frame, const ExperimentConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(frame, o); });
  for (const auto& [name, table] : summarize(frame, config.checkpoints)) {
    write_file(dir / ("summary_" + name + ".csv"), [&](std::ostream& o) { write_csv(table, o); });
  }
}

void print_digest(const MetricsFrame& f) {
  const int last = f.n_steps;
  std::printf("teacher %-10s  %d run(s) x %d students x %d steps\n", f.teacher.c_str(), f.n_runs,
              f.n_students, f.n_steps);
  std::printf("  %-10s %10s %10s\n", "kc", "estimated", "true");
  for (std::size_t i = 0; i < f.kc_count(); ++i) {
    std::printf("  %-10s %10.4f %10.4f\n", f.kc_ids[i].c_str(), stats::mean(f.est_at(last, i)),
                stats::mean(f.truth_at(last, i)));
  }
  std::printf("  cumulative errors %.3f   |est-true| %.4f\n", stats::mean(f.cum_err_at(last)),
              stats::mean(f.distance_at(last)));
}

void print_comparison(const ComparisonReport& r) {
  std::printf("%s - %s at the final step (95%% bootstrap CI, one-sided paired p)\n",
              r.label_b.c_str(), r.label_a.c_str());
  for (const auto& m : r.rows) {
    const std::string label = m.kc.empty() ? m.metric : m.metric + " " + m.kc;
    std::printf("  %-20s %+9.4f  [%+.4f, %+.4f]  p(>)=%.3g  p(<)=%.3g\n", label.c_str(),
                m.mean_diff(), m.ci.low, m.ci.high, m.paired.p_greater, m.paired.p_less);
  }
}

int simulate(const SimulateFlags& flags) {
  ExperimentConfig config;
  if (!flags.config.empty()) {
    config = load_experiment_config(flags.config);
  } else {
    config.population_path = (fs::path(default_config_dir()) / "population_q.json").string();
  }
  if (!flags.population.empty()) {
    config.population_path = flags.population;
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  if (flags.out) config.out_dir = *flags.out;
  if (flags.teacher) config.teacher = parse_teacher_kind(*flags.teacher);
  if (flags.students) config.n_students = *flags.students;
  if (flags.steps) config.n_steps = *flags.steps;
  if (flags.runs) config.n_runs = *flags.runs;
  if (flags.record_every) config.record_every = *flags.record_every;
  config.checkpoints.erase(std::remove_if(config.checkpoints.begin(), config.checkpoints.end(),
                                          [&](int s) { return s > config.n_steps; }),
                           config.checkpoints.end());
  validate_experiment_config(config);
  config.scenario_path = pick_scenario(flags.scenario, config.scenario_path);

  const Scenario scenario = load_checked_scenario(config.scenario_path);
  const PopulationSpec population = load_population(config.population_path, scenario);

  std::vector<TeacherKind> teachers{config.teacher};
  if (flags.both) {
    teachers = {TeacherKind::riarit, TeacherKind::predefined};
  }
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  const auto started = std::chrono::steady_clock::now();
  std::vector<MetricsFrame> frames;
  for (TeacherKind t : teachers) {
    ExperimentConfig c = config;
    c.teacher = t;
    frames.push_back(run_experiment(scenario, population, c));
    write_outputs(frames.back(), c, flags.both ? out / std::string(to_string(t)) : out);
    print_digest(frames.back());
  }
  if (flags.both) {
    const ComparisonReport report = compare(frames[1], frames[0]);
    write_file(out / "comparison.csv", [&](std::ostream& o) { write_csv(report.per_kc_table(), o); });
    write_file(out / "comparison_overall.csv",
               [&](std::ostream& o) { write_csv(report.overall_table(), o); });
    print_comparison(report);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  nlohmann::json manifest = {
      {"name", config.name},
      {"started_utc", utc_now()},
      {"elapsed_seconds", seconds},
      {"scenario", config.scenario_path},
      {"population", config.population_path},
      {"seed", config.seed},
      {"workers", config.workers},
      {"n_students", config.n_students},
      {"n_steps", config.n_steps},
      {"n_runs", config.n_runs},
      {"record_every", config.record_every},
      {"students_learn", config.students_learn},
      {"comprehension_learns", config.comprehension_learns},
  };
  for (TeacherKind t : teachers) {
    manifest["teachers"].push_back(std::string(to_string(t)));
  }
  write_file(out / "run_manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  std::printf("wrote %s (%.1f s)\n", out.string().c_str(), seconds);
  return 0;
}

int serve(const ServeFlags& flags) {
  auto scenario = std::make_shared<const Scenario>(load_checked_scenario(pick_scenario(flags.scenario)));
  auto catalog = std::make_shared<const Catalog>(
      load_catalog(flags.catalog.empty() ? default_catalog_path() : flags.catalog));
  SessionManager manager(scenario, catalog, flags.data, parse_teacher_kind(flags.teacher));
  ServeOptions options;
  options.host = flags.host;
  options.port = flags.port;
  options.static_dir = flags.static_dir;
  return run_server(manager, options, std::cout);
}

int validate(const ValidateFlags& flags) {
  int failures = 0;
  auto report = [&](const std::string& what, const std::function<void()>& check) {
    try {
      check();
      std::printf("ok    %s\n", what.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %s\n      %s\n", what.c_str(), e.what());
    }
  };
  const std::string scenario_path = pick_scenario(flags.scenario);
  std::optional<Scenario> scenario;
  report("scenario " + scenario_path, [&] { scenario = load_checked_scenario(scenario_path); });
  const std::string catalog_path = flags.catalog.empty() ? default_catalog_path() : flags.catalog;
  report("catalog " + catalog_path, [&] {
    const Catalog c = load_catalog(catalog_path);
    if (c.items.empty()) {
      throw ConfigError("catalog has no items");
    }
  });
  if (scenario) {
    for (const auto& path : flags.populations) {
      report("population " + path, [&] { load_population(path, *scenario); });
    }
  }
  for (const auto& path : flags.configs) {
    report("experiment " + path, [&] {
      const ExperimentConfig c = load_experiment_config(path);
      const Scenario s = load_checked_scenario(pick_scenario(c.scenario_path));
      if (c.population_path.empty()) {
        throw ConfigError(path + ": no population file given");
      }
      load_population(c.population_path, s);
    });
  }
  std::printf("%d problem(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive activity selection for the money game: simulate, serve, validate"};
  app.require_subcommand(1);
  app.footer(
      "Scenario default: $RIARIT_SCENARIO, else the shipped config/scenario.json.\n"
      "simulate writes trace.csv (run,student,step,teacher,<parameters>,correct,reward,\n"
      "c_est_<kc>...,c_true_<kc>...,cum_err), summary_*.csv and run_manifest.json;\n"
      "with --both one subdirectory per teacher plus comparison.csv.\n"
      "serve API: POST /api/sessions {scenario?,teacher?,seed?}; GET /api/sessions/ID/next;\n"
      "POST /api/sessions/ID/answer {items,trial,hint?}; GET /api/sessions/ID/state;\n"
      "GET /api/sessions/ID/events[?format=jsonl]; GET /api/scenario; GET /api/health.");

  SimulateFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a batch experiment with virtual students");
  simulate_cmd->add_option("--config", sim.config, "Experiment JSON")->check(CLI::ExistingFile);
  simulate_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->check(CLI::ExistingFile);
  simulate_cmd->add_option("--population", sim.population, "Population JSON")
      ->check(CLI::ExistingFile);
  simulate_cmd->add_option("--seed", sim.seed, "Master seed");
  simulate_cmd->add_option("--workers", sim.workers, "Worker threads")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--out", sim.out, "Output directory");
  simulate_cmd->add_option("--teacher", sim.teacher, "riarit or predefined")
      ->check(CLI::IsMember({"riarit", "predefined"}));
  simulate_cmd->add_flag("--both", sim.both, "Run both teachers and compare them");
  simulate_cmd->add_option("--students", sim.students, "Students per run")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--steps", sim.steps, "Exercises per student")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--runs", sim.runs, "Independent runs (seeds)")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--record-every", sim.record_every, "Trace stride in steps")
      ->check(CLI::PositiveNumber);

  ServeFlags srv;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live tutoring sessions over HTTP");
  serve_cmd->add_option("--scenario", srv.scenario, "Scenario JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--catalog", srv.catalog, "Object catalog JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--data", srv.data, "Session log directory")->capture_default_str();
  serve_cmd->add_option("--host", srv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", srv.port, "Port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--teacher", srv.teacher, "Default teacher for new sessions")->capture_default_str()
      ->check(CLI::IsMember({"riarit", "predefined"}));
  serve_cmd->add_option("--static", srv.static_dir, "Directory of client files to serve at /");

  ValidateFlags val;
  auto* validate_cmd = app.add_subcommand("validate", "Check scenario, catalog and experiment files");
  validate_cmd->add_option("--scenario", val.scenario, "Scenario JSON");
  validate_cmd->add_option("--catalog", val.catalog, "Object catalog JSON");
  validate_cmd->add_option("--config", val.configs, "Experiment JSON (repeatable)");
  validate_cmd->add_option("--population", val.populations, "Population JSON (repeatable)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate_cmd) {
      return simulate(sim);
    }
    if (*serve_cmd) {
      return serve(srv);
    }
    return validate(val);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
