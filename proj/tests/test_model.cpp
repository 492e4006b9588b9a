#include "doctest.h"

#include <fstream>

#include "oracles/oracles.hpp"
#include "riarit/scenario.hpp"
#include "support.hpp"

using namespace riarit;
using testing::act;
using testing::shipped_scenario;

namespace {

std::size_t kc(const char* id) { return shipped_scenario().kc_index(id); }

std::map<std::string, std::string> named(const Scenario& s, const Activity& a) {
  std::map<std::string, std::string> out;
  const auto ids = s.space.value_ids(a);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out[s.space[j].id] = ids[j];
  }
  return out;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("shipped scenario shape") {
  const Scenario& s = shipped_scenario();
  REQUIRE(s.kc_count() == 6);
  CHECK(s.kcs[0].id == "KnowMoney");
  CHECK(s.kcs[1].id == "SumInteger");
  CHECK(s.kcs[5].id == "Memory");
  REQUIRE(s.space.size() == 4);
  CHECK(s.space[0].values == std::vector<std::string>{"1", "2", "3", "4", "5", "6"});
  CHECK(s.space[1].values == std::vector<std::string>{"WS", "W", "S"});
  CHECK(s.space[2].values == std::vector<std::string>{"x€x", "x,x€"});
  CHECK(s.space[3].values == std::vector<std::string>{"Real", "Token"});
  CHECK(s.space.activity_count() == 72);
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("required competence of the first stage") {
  const auto q = required_competence(shipped_scenario().q_table, act({"1", "WS", "x€x", "Real"}));
  // ExerciseType 1 (0.7) x WS (0.8) x x€x (0.9) x Real (1)
  CHECK(q[kc("KnowMoney")] == doctest::Approx(0.504).epsilon(1e-12));
  CHECK(q[kc("SumInteger")] == doctest::Approx(0.4));
  CHECK(q[kc("Memory")] == doctest::Approx(0.5 * 0.2));
}

TEST_CASE("not-applicable entries contribute one") {
  const auto q = required_competence(shipped_scenario().q_table, act({"1", "WS", "x€x", "Token"}));
  CHECK(q[kc("SumInteger")] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(q[kc("DecomposeInteger")] == 0.0);
}

TEST_CASE("all-ones row gives one") {
  const auto q = required_competence(shipped_scenario().q_table, act({"6", "S", "x€x", "Token"}));
  CHECK(q[kc("SumInteger")] == 1.0);
  CHECK(q[kc("SumCents")] == 1.0);
  CHECK(q[kc("Memory")] == 1.0);
}

TEST_CASE("every activity matches the hand product") {
  const Scenario& s = shipped_scenario();
  for (const auto& a : s.space.all_activities()) {
    const auto got = required_competence(s.q_table, a);
    const auto want = oracle::hand_required(named(s, a));
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(std::abs(got[i] - want[i].value()) <= 1e-12);
    }
  }
}

TEST_CASE("missing cell is a configuration error") {
  ParameterSpace space({{"P", {"a", "b"}, ""}});
  QTable t(1, space);
  t.set(0, 0, 0, QEntry::of(0.5));
  CHECK(required_competence(t, Activity{{0}})[0] == 0.5);
  CHECK_THROWS_AS(required_competence(t, Activity{{1}}), ConfigError);
}

TEST_CASE("required competence is monotone and bounded by each factor") {
  const Scenario& s = shipped_scenario();
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Activity a = s.space.activity_at(rng.below(s.space.activity_count()));
    const auto base = required_competence(s.q_table, a);
    for (std::size_t i = 0; i < s.kc_count(); ++i) {
      for (std::size_t j = 0; j < s.space.size(); ++j) {
        const QEntry& e = s.q_table.at(i, j, a[j]);
        if (e.kind == QEntry::Kind::level) {
          CHECK(base[i] <= e.level + 1e-15);
        }
      }
    }
    QTable lowered = s.q_table;
    const std::size_t i = rng.below(s.kc_count());
    const std::size_t j = rng.below(s.space.size());
    const QEntry& e = s.q_table.at(i, j, a[j]);
    if (e.kind == QEntry::Kind::level) {
      lowered.set(i, j, a[j], QEntry::of(e.level * rng.uniform()));
      const auto after = required_competence(lowered, a);
      for (std::size_t k = 0; k < s.kc_count(); ++k) {
        CHECK(after[k] <= base[k]);
      }
    }
  }
}

TEST_CASE("allowed values") {
  const Scenario& s = shipped_scenario();
  SUBCASE("no constraints allow everything") {
    const ValueMask m = allowed_values({}, CompetenceVector(6, 0.0), s.space);
    for (std::size_t j = 0; j < s.space.size(); ++j) {
      CHECK(m.allowed_count(j) == s.space[j].values.size());
    }
  }
  SUBCASE("threshold is inclusive") {
    const std::vector<PrerequisiteConstraint> gate = {{0, 3, {{kc("SumInteger"), 0.6}}}};
    CompetenceVector c(6, 0.0);
    CHECK_FALSE(allowed_values(gate, c, s.space).allows(0, 3));
    c[kc("SumInteger")] = 0.6;
    CHECK(allowed_values(gate, c, s.space).allows(0, 3));
  }
  SUBCASE("zero competence unlocks only the first exercise type") {
    const ValueMask m = allowed_values(s.constraints, CompetenceVector(6, 0.0), s.space);
    CHECK(m.allowed_count(0) == 1);
    CHECK(m.allows(0, 0));
    CHECK(m.allowed_count(1) == 3);
  }
  SUBCASE("monotone in competence") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      CompetenceVector c(6);
      for (auto& x : c) x = rng.uniform();
      const ValueMask lo = allowed_values(s.constraints, c, s.space);
      for (auto& x : c) x = std::min(1.0, x + 0.1 * rng.uniform());
      const ValueMask hi = allowed_values(s.constraints, c, s.space);
      for (std::size_t j = 0; j < s.space.size(); ++j) {
        for (std::size_t v = 0; v < s.space[j].values.size(); ++v) {
          if (lo.allows(j, v)) {
            CHECK(hi.allows(j, v));
          }
        }
      }
    }
  }
}

TEST_CASE("constraint checks") {
  const Scenario& s = shipped_scenario();
  SUBCASE("first value may not be gated") {
    const std::vector<PrerequisiteConstraint> bad = {{1, 0, {{0, 0.1}}}};
    const auto findings = check_constraints(bad, s.q_table, s.space, s.kcs);
    REQUIRE_FALSE(findings.empty());
    CHECK(findings.front().find("first value") != std::string::npos);
  }
  SUBCASE("unreachable threshold is reported") {
    // type 1 never exercises DecomposeInteger, so nothing above it unlocks
    std::vector<PrerequisiteConstraint> bad;
    for (std::size_t v = 1; v < 6; ++v) {
      bad.push_back({0, v, {{kc("DecomposeInteger"), 0.5}}});
    }
    CHECK_FALSE(check_constraints(bad, s.q_table, s.space, s.kcs).empty());
  }
  SUBCASE("shipped constraints are valid") {
    CHECK(check_constraints(s.constraints, s.q_table, s.space, s.kcs).empty());
  }
}

TEST_CASE("flat index round trip") {
  const auto& space = shipped_scenario().space;
  for (std::size_t k = 0; k < space.activity_count(); ++k) {
    CHECK(space.flat_index(space.activity_at(k)) == k);
  }
  CHECK(space.flat_index(act({"1", "WS", "x€x", "Real"})) == 0);
  CHECK(space.flat_index(act({"1", "WS", "x€x", "Token"})) == 1);
}

} // TEST_SUITE
