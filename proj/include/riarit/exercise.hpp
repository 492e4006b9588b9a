#pragma once

// Concrete money exercises: prices, wallets, objects and answer checking.
// All money arithmetic is in integer cents.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "riarit/model.hpp"
#include "riarit/rng.hpp"

namespace riarit {

struct Scenario;

using Cents = std::int64_t;

struct Price {
  Cents cents = 0;
  bool operator==(const Price&) const = default;
};

enum class MoneyKind { real, token };
enum class CentsNotation { euro_sign_between, comma_then_euro };  // "51€25" / "51,25€"

/// Client bug: an answer that cannot come from the wallet or the trial budget.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Digits read straight off one note or coin ("a" class).
inline constexpr int kSingleItemDigits[] = {1, 2, 5};
/// Digits that need more than one item ("b" class).
inline constexpr int kMultiItemDigits[] = {3, 4, 6, 7, 8, 9};

/// Price of an exercise type from explicit digits (tens, units[, tenths,
/// hundredths]). Throws std::domain_error when a digit is outside its class.
Price price_from_digits(int exercise_type, std::span<const int> digits);

/// Random price of an exercise type 1..6. Throws std::domain_error otherwise.
Price generate_price(int exercise_type, Rng& rng);

struct CatalogItem {
  std::string id;
  std::string name;
  std::string image;
  Cents min_cents = 0;
  Cents max_cents = 0;
};

struct Catalog {
  std::vector<CatalogItem> items;
};

Catalog parse_catalog(std::string_view text, const std::string& source = "<catalog>");
Catalog load_catalog(const std::string& path);
std::string default_catalog_path();

/// Uniform pick among items whose band contains the price, else the item with
/// the nearest band.
std::string pick_object(Price price, const Catalog& catalog, Rng& rng);

/// Largest-first decomposition over `denominations` (any order).
std::vector<Cents> greedy_decomposition(Cents amount, std::span<const Cents> denominations);

/// Greedy core plus 4-8 random distractors, sorted largest first.
std::vector<Cents> build_wallet(Price price, std::span<const Cents> denominations, Rng& rng);

/// A sub-multiset of `wallet` summing to `amount`: largest-first when that
/// works, exact subset-sum search otherwise. nullopt when impossible.
std::optional<std::vector<Cents>> compose_from_wallet(Cents amount, std::span<const Cents> wallet);

struct ExerciseInstance {
  Activity activity;
  int exercise_type = 1;
  Price price;
  std::string object_id;
  std::vector<Cents> wallet;
  MoneyKind money = MoneyKind::real;
  int trial_limit = 3;

  bool operator==(const ExerciseInstance&) const = default;
};

struct AnswerSubmission {
  std::vector<Cents> items;
  int trial = 1;
  /// The student looked at the hint this trial (logged, no effect on reward).
  bool hint_used = false;
};

struct Verdict {
  enum class Kind { correct, incorrect, solution };
  Kind kind = Kind::incorrect;
  /// Sum of submitted items minus price.
  Cents difference = 0;
  /// Canonical composition, only for Kind::solution.
  std::vector<Cents> solution;
};

std::string_view to_string(Verdict::Kind kind);

/// Correct iff the items sum to the price; the final failed trial yields the
/// canonical solution. Throws ProtocolError for items not in the wallet or a
/// trial outside [1, trial_limit].
Verdict validate_answer(const AnswerSubmission& submission, const ExerciseInstance& instance);

/// Indices of the money-game parameters inside a scenario.
struct MoneyBinding {
  std::size_t exercise_type = 0;
  std::size_t presentation = 1;
  std::size_t cents_notation = 2;
  std::size_t money_type = 3;

  static MoneyBinding resolve(const Scenario& scenario);

  int exercise_type_of(const Scenario& s, const Activity& a) const;
  MoneyKind money_of(const Scenario& s, const Activity& a) const;
  CentsNotation notation_of(const Scenario& s, const Activity& a) const;
  bool shows_written(const Scenario& s, const Activity& a) const;
  bool speaks(const Scenario& s, const Activity& a) const;
};

ExerciseInstance instantiate(const Scenario& scenario, const Catalog& catalog,
                             const Activity& activity, Rng& rng);

std::string format_price_written(Price price, CentsNotation notation);
std::string format_price_spoken(Price price);

/// Client-facing exercise payload (activity ids, rendering fields, wallet).
nlohmann::json exercise_to_json(const Scenario& scenario, const Catalog& catalog,
                                const ExerciseInstance& instance);

} // namespace riarit
