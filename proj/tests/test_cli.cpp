#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(RIARIT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.out.append(buf.data(), n);
  }
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string write_scenario(const std::string& dir, const std::function<void(json&)>& edit) {
  json doc = json::parse(slurp(testing::config_path("scenario.json")));
  edit(doc);
  const std::string path = dir + "/scenario.json";
  std::ofstream(path) << doc.dump(2) << '\n';
  return path;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("smallest simulation") {
  const std::string dir = testing::scratch_dir("cli_small");
  const Run r = cli("simulate --students 1 --steps 1 --teacher predefined --out " + dir);
  REQUIRE(r.status == 0);
  const std::string trace = slurp(fs::path(dir) / "trace.csv");
  CHECK(lines(trace) == 2);
  CHECK(trace.find("predefined,1,WS,x€x,Real,") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "run_manifest.json"));
  CHECK(fs::exists(fs::path(dir) / "summary_competence_quantiles.csv"));
}

TEST_CASE("same seed, byte-identical outputs") {
  const std::string a = testing::scratch_dir("cli_seed_a");
  const std::string b = testing::scratch_dir("cli_seed_b");
  const std::string args = "simulate --students 20 --steps 30 --runs 2 --seed 9 --out ";
  REQUIRE(cli(args + a + " --workers 1").status == 0);
  REQUIRE(cli(args + b + " --workers 3").status == 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "run_manifest.json") {
      continue;
    }
    CHECK_MESSAGE(slurp(entry.path()) == slurp(fs::path(b) / name), name.string());
  }
}

TEST_CASE("both teachers with comparison") {
  const std::string dir = testing::scratch_dir("cli_both");
  const Run r = cli("simulate --both --students 30 --steps 20 --out " + dir);
  REQUIRE(r.status == 0);
  CHECK(fs::exists(fs::path(dir) / "riarit" / "trace.csv"));
  CHECK(fs::exists(fs::path(dir) / "predefined" / "trace.csv"));
  const std::string cmp = slurp(fs::path(dir) / "comparison.csv");
  CHECK(lines(cmp) == 7);
  CHECK(cmp.find("KnowMoney") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "comparison_overall.csv"));
  const json manifest = json::parse(slurp(fs::path(dir) / "run_manifest.json"));
  CHECK(manifest["teachers"].size() == 2);
}

TEST_CASE("experiment file") {
  const std::string dir = testing::scratch_dir("cli_config");
  const Run r = cli("simulate --config " + testing::config_path("experiments/exp_p_nolearn.json") +
                    " --students 10 --runs 1 --out " + dir);
  REQUIRE(r.status == 0);
  CHECK(fs::exists(fs::path(dir) / "summary_profiles.csv"));
  CHECK(lines(slurp(fs::path(dir) / "trace.csv")) == 10 * 40 + 1);
}

TEST_CASE("validate") {
  const std::string cfg = testing::config_path("");
  const Run ok = cli("validate --config " + cfg + "experiments/exp_q_learn.json --population " +
                     cfg + "population_p.json");
  CHECK(ok.status == 0);
  CHECK(ok.out.find("0 problem(s)") != std::string::npos);

  const std::string dir = testing::scratch_dir("cli_validate");
  const std::string bad = write_scenario(
      dir, [](json& d) { d["q_table"]["SumInteger"]["PricePresentation"][1] = 1.2; });
  const Run r = cli("validate --scenario " + bad);
  CHECK(r.status == 1);
  CHECK(r.out.find("(SumInteger, PricePresentation, W) = 1.2") != std::string::npos);
  CHECK(r.out.find("scenario.json:") != std::string::npos);

  const std::string first = write_scenario(dir, [](json& d) {
    d["constraints"].push_back(
        {{"parameter", "ExerciseType"}, {"value", "1"}, {"requires", {{"Memory", 0.3}}}});
  });
  const Run f = cli("validate --scenario " + first);
  CHECK(f.status == 1);
  CHECK(f.out.find("first value") != std::string::npos);

  const Run sim = cli("simulate --students 1 --steps 1 --scenario " + first + " --out " + dir);
  CHECK(sim.status == 1);
  CHECK(sim.out.find("error:") != std::string::npos);
}

TEST_CASE("bad arguments") {
  CHECK(cli("simulate --students 0").status != 0);
  CHECK(cli("simulate --teacher oracle --out " + testing::scratch_dir("cli_bad")).status != 0);
  CHECK(cli("").status != 0);
}

TEST_CASE("serve stops on SIGTERM") {
  const std::string dir = testing::scratch_dir("cli_serve");
  const std::string log = dir + "/serve.log";
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(fd, 1);
    ::dup2(fd, 2);
    const std::string data = dir + "/sessions";
    ::execl(RIARIT_CLI, RIARIT_CLI, "serve", "--port", "0", "--data", data.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  int port = 0;
  for (int i = 0; i < 200 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
    const std::string text = slurp(log);
    const auto at = text.find("127.0.0.1:");
    if (at != std::string::npos) {
      port = std::atoi(text.c_str() + at + 10);
    }
  }
  REQUIRE(port > 0);
  httplib::Client c("127.0.0.1", port);
  auto health = c.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  auto created = c.Post("/api/sessions", R"({"seed": 1})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);

  ::kill(pid, SIGTERM);
  int raw = 0;
  ::waitpid(pid, &raw, 0);
  CHECK(WIFEXITED(raw));
  CHECK(WEXITSTATUS(raw) == 0);
  CHECK(fs::exists(dir + "/sessions/s000001/events.jsonl"));
}

} // TEST_SUITE
