#include "riarit/exercise.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>

#include "riarit/json_locator.hpp"
#include "riarit/scenario.hpp"

#ifndef RIARIT_DEFAULT_CONFIG_DIR
#define RIARIT_DEFAULT_CONFIG_DIR "config"
#endif

namespace riarit {

namespace {

enum class DigitClass { single, multi };

// Digit classes of (tens, units, tenths, hundredths) per exercise type.
std::vector<DigitClass> digit_pattern(int exercise_type) {
  using D = DigitClass;
  switch (exercise_type) {
    case 1: return {D::single, D::single};
    case 2: return {D::single, D::multi};
    case 3: return {D::multi, D::multi};
    case 4: return {D::single, D::single, D::single, D::single};
    case 5: return {D::multi, D::multi, D::single, D::single};
    case 6: return {D::multi, D::multi, D::multi, D::multi};
    default:
      throw std::domain_error("exercise type must be 1..6, got " + std::to_string(exercise_type));
  }
}

bool in_class(int digit, DigitClass cls) {
  if (cls == DigitClass::single) {
    return std::find(std::begin(kSingleItemDigits), std::end(kSingleItemDigits), digit) !=
           std::end(kSingleItemDigits);
  }
  return std::find(std::begin(kMultiItemDigits), std::end(kMultiItemDigits), digit) !=
         std::end(kMultiItemDigits);
}

Cents digits_to_cents(std::span<const int> digits) {
  static constexpr Cents kPlace[] = {1000, 100, 10, 1};
  Cents total = 0;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    total += digits[k] * kPlace[k];
  }
  return total;
}

} // namespace

Price price_from_digits(int exercise_type, std::span<const int> digits) {
  const auto pattern = digit_pattern(exercise_type);
  if (digits.size() != pattern.size()) {
    throw std::domain_error("exercise type " + std::to_string(exercise_type) + " takes " +
                            std::to_string(pattern.size()) + " digits");
  }
  for (std::size_t k = 0; k < digits.size(); ++k) {
    if (!in_class(digits[k], pattern[k])) {
      throw std::domain_error("digit " + std::to_string(digits[k]) + " is outside its class");
    }
  }
  return Price{digits_to_cents(digits)};
}

Price generate_price(int exercise_type, Rng& rng) {
  const auto pattern = digit_pattern(exercise_type);
  std::vector<int> digits;
  for (DigitClass cls : pattern) {
    if (cls == DigitClass::single) {
      digits.push_back(kSingleItemDigits[rng.below(std::size(kSingleItemDigits))]);
    } else {
      digits.push_back(kMultiItemDigits[rng.below(std::size(kMultiItemDigits))]);
    }
  }
  return Price{digits_to_cents(digits)};
}

Catalog parse_catalog(std::string_view text, const std::string& source) {
  const auto doc = parse_json_document(text, source);
  const JsonLocator locator(text);
  auto fail = [&](const nlohmann::json::json_pointer& at, const std::string& message) {
    throw ConfigError(source + ":" + std::to_string(locator.line_of(at)) + ": " + message);
  };
  const nlohmann::json::json_pointer items_at("/items");
  if (!doc.contains(items_at) || !doc.at(items_at).is_array()) {
    fail(items_at, "catalog needs an 'items' array");
  }
  Catalog catalog;
  const auto& items = doc.at(items_at);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto at = items_at / k;
    const auto& it = items[k];
    try {
      CatalogItem item;
      item.id = it.at("id").get<std::string>();
      item.name = it.value("name", item.id);
      item.image = it.value("image", item.id + ".png");
      item.min_cents = it.at("min_cents").get<Cents>();
      item.max_cents = it.at("max_cents").get<Cents>();
      if (item.min_cents <= 0 || item.max_cents < item.min_cents) {
        fail(at, "catalog item '" + item.id + "' needs 0 < min_cents <= max_cents");
      }
      catalog.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      fail(at, std::string("malformed catalog item: ") + e.what());
    }
  }
  if (catalog.items.empty()) {
    fail(items_at, "catalog is empty");
  }
  return catalog;
}

Catalog load_catalog(const std::string& path) {
  return parse_catalog(read_text_file(path), path);
}

std::string default_catalog_path() {
  return (std::filesystem::path(RIARIT_DEFAULT_CONFIG_DIR) / "catalog.json").string();
}

std::string pick_object(Price price, const Catalog& catalog, Rng& rng) {
  if (catalog.items.empty()) {
    throw ConfigError("object catalog is empty");
  }
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < catalog.items.size(); ++k) {
    const auto& item = catalog.items[k];
    if (item.min_cents <= price.cents && price.cents <= item.max_cents) {
      eligible.push_back(k);
    }
  }
  if (!eligible.empty()) {
    return catalog.items[eligible[rng.below(eligible.size())]].id;
  }
  std::size_t best = 0;
  Cents best_gap = -1;
  for (std::size_t k = 0; k < catalog.items.size(); ++k) {
    const auto& item = catalog.items[k];
    const Cents gap = price.cents < item.min_cents ? item.min_cents - price.cents
                                                   : price.cents - item.max_cents;
    if (best_gap < 0 || gap < best_gap) {
      best = k;
      best_gap = gap;
    }
  }
  return catalog.items[best].id;
}

std::vector<Cents> greedy_decomposition(Cents amount, std::span<const Cents> denominations) {
  std::vector<Cents> denoms(denominations.begin(), denominations.end());
  std::sort(denoms.begin(), denoms.end(), std::greater<>());
  std::vector<Cents> out;
  for (Cents d : denoms) {
    while (d > 0 && amount >= d) {
      out.push_back(d);
      amount -= d;
    }
  }
  if (amount != 0) {
    throw std::domain_error("amount is not composable from the given denominations");
  }
  return out;
}

std::vector<Cents> build_wallet(Price price, std::span<const Cents> denominations, Rng& rng) {
  std::vector<Cents> wallet = greedy_decomposition(price.cents, denominations);
  std::vector<Cents> pool;
  const Cents cap = std::max<Cents>(price.cents * 2, 100);
  for (Cents d : denominations) {
    if (d <= cap) {
      pool.push_back(d);
    }
  }
  std::sort(pool.begin(), pool.end());
  const auto extra = rng.between(4, 8);
  for (std::int64_t k = 0; k < extra; ++k) {
    wallet.push_back(pool[rng.below(pool.size())]);
  }
  std::sort(wallet.begin(), wallet.end(), std::greater<>());
  return wallet;
}

std::optional<std::vector<Cents>> compose_from_wallet(Cents amount,
                                                      std::span<const Cents> wallet) {
  std::vector<Cents> items(wallet.begin(), wallet.end());
  std::sort(items.begin(), items.end(), std::greater<>());

  std::vector<Cents> picked;
  Cents rest = amount;
  for (Cents item : items) {
    if (item <= rest) {
      picked.push_back(item);
      rest -= item;
    }
  }
  if (rest == 0) {
    return picked;
  }

  // 0/1 subset-sum over wallet items; from[s] = index of the item that first
  // reached sum s.
  if (amount < 0) {
    return std::nullopt;
  }
  const auto target = static_cast<std::size_t>(amount);
  std::vector<int> from(target + 1, -1);
  std::vector<std::size_t> prev(target + 1, 0);
  std::vector<bool> reach(target + 1, false);
  reach[0] = true;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto v = static_cast<std::size_t>(items[k]);
    if (v == 0 || v > target) {
      continue;
    }
    for (std::size_t s = target; s >= v; --s) {
      if (!reach[s] && reach[s - v]) {
        reach[s] = true;
        from[s] = static_cast<int>(k);
        prev[s] = s - v;
      }
      if (s == v) {
        break;
      }
    }
  }
  if (!reach[target]) {
    return std::nullopt;
  }
  std::vector<Cents> out;
  for (std::size_t s = target; s > 0; s = prev[s]) {
    out.push_back(items[static_cast<std::size_t>(from[s])]);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::string_view to_string(Verdict::Kind kind) {
  switch (kind) {
    case Verdict::Kind::correct: return "correct";
    case Verdict::Kind::incorrect: return "incorrect";
    case Verdict::Kind::solution: return "solution";
  }
  return "incorrect";
}

Verdict validate_answer(const AnswerSubmission& submission, const ExerciseInstance& instance) {
  if (submission.trial < 1 || submission.trial > instance.trial_limit) {
    throw ProtocolError("trial " + std::to_string(submission.trial) + " outside 1.." +
                        std::to_string(instance.trial_limit));
  }
  std::map<Cents, int> available;
  for (Cents c : instance.wallet) {
    ++available[c];
  }
  Cents sum = 0;
  for (Cents c : submission.items) {
    if (--available[c] < 0) {
      throw ProtocolError("item of " + std::to_string(c) + " cents is not in the wallet");
    }
    sum += c;
  }
  Verdict v;
  v.difference = sum - instance.price.cents;
  if (v.difference == 0) {
    v.kind = Verdict::Kind::correct;
  } else if (submission.trial == instance.trial_limit) {
    v.kind = Verdict::Kind::solution;
    auto solution = compose_from_wallet(instance.price.cents, instance.wallet);
    if (!solution) {
      throw std::logic_error("wallet cannot compose its own price");
    }
    v.solution = std::move(*solution);
  } else {
    v.kind = Verdict::Kind::incorrect;
  }
  return v;
}

MoneyBinding MoneyBinding::resolve(const Scenario& s) {
  MoneyBinding b;
  b.exercise_type = s.space.index_of("ExerciseType");
  b.presentation = s.space.index_of("PricePresentation");
  b.cents_notation = s.space.index_of("CentsNotation");
  b.money_type = s.space.index_of("MoneyType");
  return b;
}

int MoneyBinding::exercise_type_of(const Scenario& s, const Activity& a) const {
  return std::stoi(s.space[exercise_type].values.at(a[exercise_type]));
}

MoneyKind MoneyBinding::money_of(const Scenario& s, const Activity& a) const {
  return s.space[money_type].values.at(a[money_type]) == "Token" ? MoneyKind::token
                                                                  : MoneyKind::real;
}

CentsNotation MoneyBinding::notation_of(const Scenario& s, const Activity& a) const {
  const auto& id = s.space[cents_notation].values.at(a[cents_notation]);
  return id.find(',') != std::string::npos ? CentsNotation::comma_then_euro
                                           : CentsNotation::euro_sign_between;
}

bool MoneyBinding::shows_written(const Scenario& s, const Activity& a) const {
  return s.space[presentation].values.at(a[presentation]).find('W') != std::string::npos;
}

bool MoneyBinding::speaks(const Scenario& s, const Activity& a) const {
  return s.space[presentation].values.at(a[presentation]).find('S') != std::string::npos;
}

ExerciseInstance instantiate(const Scenario& scenario, const Catalog& catalog,
                             const Activity& activity, Rng& rng) {
  const auto binding = MoneyBinding::resolve(scenario);
  ExerciseInstance inst;
  inst.activity = activity;
  inst.exercise_type = binding.exercise_type_of(scenario, activity);
  inst.money = binding.money_of(scenario, activity);
  inst.trial_limit = scenario.session.trial_limit;
  inst.price = generate_price(inst.exercise_type, rng);
  inst.object_id = pick_object(inst.price, catalog, rng);
  inst.wallet = build_wallet(inst.price, scenario.denominations, rng);
  return inst;
}

std::string format_price_written(Price price, CentsNotation notation) {
  const Cents euros = price.cents / 100;
  const Cents cents = price.cents % 100;
  std::string out = std::to_string(euros);
  if (cents == 0) {
    return out + "€";
  }
  std::string cc = (cents < 10 ? "0" : "") + std::to_string(cents);
  if (notation == CentsNotation::euro_sign_between) {
    return out + "€" + cc;
  }
  return out + "," + cc + "€";
}

std::string format_price_spoken(Price price) {
  const Cents euros = price.cents / 100;
  const Cents cents = price.cents % 100;
  std::string out = std::to_string(euros) + (euros == 1 ? " euro" : " euros");
  if (cents != 0) {
    out += " and " + std::to_string(cents) + (cents == 1 ? " cent" : " cents");
  }
  return out;
}

nlohmann::json exercise_to_json(const Scenario& scenario, const Catalog& catalog,
                                const ExerciseInstance& instance) {
  const auto binding = MoneyBinding::resolve(scenario);
  const auto ids = scenario.space.value_ids(instance.activity);
  nlohmann::json activity = nlohmann::json::object();
  for (std::size_t j = 0; j < ids.size(); ++j) {
    activity[scenario.space[j].id] = ids[j];
  }
  nlohmann::json object = {{"id", instance.object_id}};
  for (const auto& item : catalog.items) {
    if (item.id == instance.object_id) {
      object["name"] = item.name;
      object["image"] = item.image;
    }
  }
  return {
      {"activity", activity},
      {"exercise_type", instance.exercise_type},
      {"price_cents", instance.price.cents},
      {"price_written",
       format_price_written(instance.price, binding.notation_of(scenario, instance.activity))},
      {"price_spoken_text", format_price_spoken(instance.price)},
      {"show_written", binding.shows_written(scenario, instance.activity)},
      {"speak", binding.speaks(scenario, instance.activity)},
      {"money_kind", instance.money == MoneyKind::token ? "token" : "real"},
      {"object", object},
      {"wallet", instance.wallet},
      {"trial_limit", instance.trial_limit},
  };
}

} // namespace riarit
