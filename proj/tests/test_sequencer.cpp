#include "doctest.h"

#include "oracles/oracles.hpp"
#include "riarit/sequencer.hpp"
#include "support.hpp"

using namespace riarit;
using testing::act;
using testing::shipped_scenario;

TEST_SUITE("sequencer") {

TEST_CASE("stage activities") {
  const Scenario& s = shipped_scenario();
  Rng rng(4);
  CHECK(next_activity({1, {}}, s.stages, rng) == act({"1", "WS", "x€x", "Real"}));
  CHECK(next_activity({3, {}}, s.stages, rng) == act({"2", "S", "x€x", "Real"}));
  int tokens = 0;
  for (int k = 0; k < 4000; ++k) {
    const Activity a = next_activity({10, {}}, s.stages, rng);
    CHECK(s.space.value_ids(a)[0] == "6");
    CHECK(s.space.value_ids(a)[1] == "W");
    CHECK(s.space.value_ids(a)[2] == "x,x€");
    tokens += s.space.value_ids(a)[3] == "Token" ? 1 : 0;
  }
  CHECK(tokens > 1800);
  CHECK(tokens < 2200);
}

TEST_CASE("advancement examples") {
  const auto& table = shipped_scenario().stages;
  CHECK(advance({1, {true}}, true, table) == StageProgress{2, {}});
  CHECK(advance({6, {true, false, true}}, true, table) == StageProgress{7, {}});
  CHECK(advance({6, {true, true}}, true, table) == StageProgress{6, {true, true, true}});
  StageProgress last{10, {}};
  for (int k = 0; k < 50; ++k) {
    last = advance(last, k % 3 != 0, table);
    CHECK(last.stage == 10);
  }
}

TEST_CASE("exhaustive agreement with the written rules") {
  const auto& table = shipped_scenario().stages;
  for (int stage = 1; stage <= 10; ++stage) {
    for (int len = 0; len <= 5; ++len) {
      for (int bits = 0; bits < (1 << len); ++bits) {
        std::vector<bool> h;
        for (int k = 0; k < len; ++k) h.push_back(bits & (1 << k));
        for (bool outcome : {false, true}) {
          auto full = h;
          full.push_back(outcome);
          const StageProgress got = advance({stage, h}, outcome, table);
          const StageProgress want = oracle::should_advance(stage, full)
                                         ? StageProgress{stage + 1, {}}
                                         : StageProgress{stage, full};
          CHECK(got == want);
        }
      }
    }
  }
}

TEST_CASE("four successes always advance and stages never go back") {
  const auto& table = shipped_scenario().stages;
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    StageProgress p{1, {}};
    for (int k = 0; k < 60; ++k) {
      const StageProgress next = advance(p, rng.bernoulli(0.6), table);
      CHECK(next.stage >= p.stage);
      p = next;
    }
    if (p.stage < 10) {
      const int before = p.stage;
      for (int k = 0; k < 4; ++k) p = advance(p, true, table);
      CHECK(p.stage > before);
    }
  }
}

TEST_CASE("rule_met needs a full window") {
  CHECK_FALSE(rule_met({3, 4}, {true, true, true}));
  CHECK(rule_met({3, 4}, {false, true, true, true}));
  CHECK(rule_met({3, 4}, {true, false, true, true}));
  CHECK_FALSE(rule_met({3, 4}, {true, true, true, false, false}));
  CHECK_FALSE(rule_met({2, 2}, {true}));
}

} // TEST_SUITE
