#include "doctest.h"

#include <numeric>
#include <set>

#include "oracles/oracles.hpp"
#include "riarit/exercise.hpp"
#include "riarit/scenario.hpp"
#include "support.hpp"

using namespace riarit;
using testing::act;
using testing::shipped_catalog;
using testing::shipped_scenario;

namespace {

const std::vector<Cents> kEuro = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000,
                                  20000, 50000};

bool contains_all(std::vector<Cents> wallet, const std::vector<Cents>& core) {
  return oracle::drawn_from(core, wallet);
}

ExerciseInstance fixed(Cents price, std::vector<Cents> wallet) {
  ExerciseInstance inst;
  inst.price = Price{price};
  inst.wallet = std::move(wallet);
  return inst;
}

} // namespace

TEST_SUITE("exercise") {

TEST_CASE("prices from digits") {
  const int t1[] = {5, 1};
  const int t2[] = {2, 3};
  const int t4[] = {5, 1, 2, 5};
  CHECK(price_from_digits(1, t1).cents == 5100);
  CHECK(price_from_digits(2, t2).cents == 2300);
  CHECK(price_from_digits(4, t4).cents == 5125);
  const int bad[] = {3, 1};
  CHECK_THROWS_AS(price_from_digits(1, bad), std::domain_error);
  Rng rng(1);
  CHECK_THROWS_AS(generate_price(0, rng), std::domain_error);
  CHECK_THROWS_AS(generate_price(7, rng), std::domain_error);
}

TEST_CASE("generated digits stay in their classes") {
  const std::set<int> a = {1, 2, 5};
  const std::set<int> b = {3, 4, 6, 7, 8, 9};
  const std::vector<std::vector<const std::set<int>*>> pattern = {
      {&a, &a}, {&a, &b}, {&b, &b}, {&a, &a, &a, &a}, {&b, &b, &a, &a}, {&b, &b, &b, &b}};
  Rng rng(99);
  for (int type = 1; type <= 6; ++type) {
    std::set<Cents> seen;
    for (int k = 0; k < 30000; ++k) {
      const Cents c = generate_price(type, rng).cents;
      seen.insert(c);
      const int digits[] = {int(c / 1000 % 10), int(c / 100 % 10), int(c / 10 % 10), int(c % 10)};
      const auto& pat = pattern[type - 1];
      CHECK(c < 10000);
      for (std::size_t d = 0; d < pat.size(); ++d) {
        CHECK(pat[d]->count(digits[d]) == 1);
      }
      if (type <= 3) {
        CHECK(c % 100 == 0);
      }
    }
    std::size_t combos = 1;
    for (const auto* cls : pattern[type - 1]) combos *= cls->size();
    CHECK(seen.size() == combos);
  }
}

TEST_CASE("object choice") {
  const Catalog scooter{{{"scooter", "Scooter", "scooter.png", 4000, 8000}}};
  Rng rng(2);
  CHECK(pick_object(Price{5100}, scooter, rng) == "scooter");
  CHECK(pick_object(Price{150}, scooter, rng) == "scooter");
  CHECK_THROWS_AS(pick_object(Price{150}, Catalog{}, rng), ConfigError);

  const Catalog two{{{"a", "A", "a.png", 1000, 6000}, {"b", "B", "b.png", 5000, 9000},
                     {"c", "C", "c.png", 100, 200}}};
  std::set<std::string> picks;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r1(seed), r2(seed);
    const auto p = pick_object(Price{5500}, two, r1);
    CHECK(p == pick_object(Price{5500}, two, r2));
    picks.insert(p);
  }
  CHECK(picks == std::set<std::string>{"a", "b"});
}

TEST_CASE("shipped catalog covers every generated price") {
  const Catalog& c = shipped_catalog();
  CHECK(c.items.size() == 30);
  Rng rng(6);
  for (int type = 1; type <= 6; ++type) {
    for (int k = 0; k < 500; ++k) {
      const Price p = generate_price(type, rng);
      bool inside = false;
      for (const auto& item : c.items) {
        inside = inside || (item.min_cents <= p.cents && p.cents <= item.max_cents);
      }
      CHECK(inside);
    }
  }
}

TEST_CASE("wallet contains the greedy core") {
  CHECK(greedy_decomposition(5100, kEuro) == std::vector<Cents>{5000, 100});
  CHECK(greedy_decomposition(5125, kEuro) == std::vector<Cents>{5000, 100, 20, 5});
  CHECK(greedy_decomposition(1, kEuro) == std::vector<Cents>{1});
  Rng rng(12);
  for (Cents price : {Cents(1), Cents(5100), Cents(5125), Cents(9999), Cents(3344)}) {
    for (int k = 0; k < 200; ++k) {
      const auto w = build_wallet(Price{price}, kEuro, rng);
      const auto core = greedy_decomposition(price, kEuro);
      CHECK(contains_all(w, core));
      CHECK(w.size() >= core.size() + 4);
      CHECK(w.size() <= core.size() + 8);
      CHECK(std::is_sorted(w.begin(), w.end(), std::greater<>()));
    }
  }
}

TEST_CASE("answer verdicts") {
  const ExerciseInstance inst = fixed(5100, {5000, 2000, 100, 50, 10});
  const Verdict ok = validate_answer({{5000, 100}, 1}, inst);
  CHECK(ok.kind == Verdict::Kind::correct);
  CHECK(ok.difference == 0);
  const Verdict none = validate_answer({{}, 1}, inst);
  CHECK(none.kind == Verdict::Kind::incorrect);
  CHECK(none.difference == -5100);
  const Verdict over = validate_answer({{5000, 2000}, 2}, inst);
  CHECK(over.kind == Verdict::Kind::incorrect);
  CHECK(over.difference == 1900);
  const Verdict third = validate_answer({{5000}, 3}, inst);
  CHECK(third.kind == Verdict::Kind::solution);
  CHECK(third.solution == std::vector<Cents>{5000, 100});
  CHECK(validate_answer({{5000, 100}, 3}, inst).kind == Verdict::Kind::correct);
}

TEST_CASE("protocol errors") {
  const ExerciseInstance inst = fixed(5100, {5000, 100});
  CHECK_THROWS_AS(validate_answer({{200}, 1}, inst), ProtocolError);
  CHECK_THROWS_AS(validate_answer({{100, 100}, 1}, inst), ProtocolError);
  CHECK_THROWS_AS(validate_answer({{100}, 0}, inst), ProtocolError);
  CHECK_THROWS_AS(validate_answer({{100}, 4}, inst), ProtocolError);
}

TEST_CASE("solution search agrees with subset enumeration") {
  Rng rng(77);
  const std::vector<Cents> faces = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Cents> wallet;
    const auto n = rng.between(0, 12);
    for (std::int64_t k = 0; k < n; ++k) wallet.push_back(faces[rng.below(faces.size())]);
    const Cents price = rng.between(1, 9999);
    const auto found = compose_from_wallet(price, wallet);
    CHECK(found.has_value() == oracle::composable(price, wallet));
    if (found) {
      CHECK(std::accumulate(found->begin(), found->end(), Cents(0)) == price);
      CHECK(oracle::drawn_from(*found, wallet));
    }
  }
}

TEST_CASE("greedy over the wallet can fail where the search succeeds") {
  // largest-first takes 50 and then cannot reach 60
  const auto found = compose_from_wallet(60, std::vector<Cents>{50, 20, 20, 20});
  REQUIRE(found.has_value());
  CHECK(*found == std::vector<Cents>{20, 20, 20});
}

TEST_CASE("price rendering") {
  CHECK(format_price_written(Price{5125}, CentsNotation::euro_sign_between) == "51€25");
  CHECK(format_price_written(Price{5125}, CentsNotation::comma_then_euro) == "51,25€");
  CHECK(format_price_written(Price{5100}, CentsNotation::euro_sign_between) == "51€");
  CHECK(format_price_written(Price{5100}, CentsNotation::comma_then_euro) == "51€");
  CHECK(format_price_written(Price{5105}, CentsNotation::comma_then_euro) == "51,05€");
  CHECK(format_price_spoken(Price{5125}) == "51 euros and 25 cents");
  CHECK(format_price_spoken(Price{100}) == "1 euro");
  CHECK(format_price_spoken(Price{101}) == "1 euro and 1 cent");
}

TEST_CASE("instances follow their activity") {
  const Scenario& s = shipped_scenario();
  Rng rng(31);
  for (const auto& a : s.space.all_activities()) {
    const ExerciseInstance inst = instantiate(s, shipped_catalog(), a, rng);
    const auto ids = s.space.value_ids(a);
    CHECK(inst.exercise_type == std::stoi(ids[0]));
    CHECK((inst.money == MoneyKind::token) == (ids[3] == "Token"));
    CHECK(inst.trial_limit == 3);
    CHECK(compose_from_wallet(inst.price.cents, inst.wallet).has_value());
    const auto j = exercise_to_json(s, shipped_catalog(), inst);
    CHECK(j["show_written"].get<bool>() == (ids[1] != "S"));
    CHECK(j["speak"].get<bool>() == (ids[1] != "W"));
    CHECK(j["price_cents"].get<Cents>() == inst.price.cents);
  }
}

TEST_CASE("same seed gives the same instance") {
  const Scenario& s = shipped_scenario();
  const Activity a = act({"5", "W", "x,x€", "Token"});
  Rng r1(8), r2(8);
  CHECK(instantiate(s, shipped_catalog(), a, r1) == instantiate(s, shipped_catalog(), a, r2));
}

} // TEST_SUITE
