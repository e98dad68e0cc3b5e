#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace egoharness {

using Json = nlohmann::json;

enum class NutritionBasis { Per100g, Total };

struct NutritionFacts {
    NutritionBasis basis = NutritionBasis::Per100g;
    double serving_size_g = 100.0;
    double calories_kcal = 0.0;
    double protein_g = 0.0;
    double fat_g = 0.0;
    double carbs_g = 0.0;
    double sugar_g = 0.0;
    double sodium_mg = 0.0;
    double fiber_g = 0.0;

    /// All-zero aggregate.
    static NutritionFacts zero_total();

    /// Adds `factor` copies of `other` to every component (serving size too).
    void accumulate(const NutritionFacts &other, double factor);

    bool operator==(const NutritionFacts &) const = default;
};

Json to_json(const NutritionFacts &facts);
NutritionFacts nutrition_from_json(const Json &j, std::string_view context);

/// Top-level catalog collections of a scenario document.
enum class CatalogKind { Products, Dishes, Recipes, Ingredients, SetMeals };

/// Per-user ledger collections.
enum class LedgerKind { Cart, Order, ShoppingList, Menu };

std::string_view collection_key(CatalogKind kind);
std::string_view collection_key(LedgerKind kind);

struct CatalogRecord {
    std::string name; // normalized
    std::string category;
    std::optional<double> price; // shelf price, tax included
    std::optional<double> tax_rate;
    std::optional<double> discount; // multiplicative factor
    std::vector<std::string> taste;
    std::vector<std::string> nutritional_characteristics;
    std::optional<std::string> country_of_origin;
    std::vector<std::string> allergens;
    std::optional<NutritionFacts> nutrition;
    Json extra = Json::object(); // scenario-specific fields

    bool operator==(const CatalogRecord &) const = default;
};

struct LedgerItem {
    std::string name; // normalized
    double quantity = 1.0;
    std::optional<std::string> category;
    std::optional<double> price;
    std::optional<double> tax_rate;
    std::optional<double> discount;
    Json extra = Json::object();
    /// Document key the name was read from; presentation only, not digested.
    std::string name_key = "product_name";

    bool operator==(const LedgerItem &o) const {
        return name == o.name && quantity == o.quantity && category == o.category && price == o.price &&
               tax_rate == o.tax_rate && discount == o.discount && extra == o.extra;
    }
};

struct UserLedger {
    std::string user_id;
    std::vector<LedgerItem> items;
    Json extra = Json::object();

    bool operator==(const UserLedger &) const = default;
};

/// Mutable world state of one scenario: catalog plus per-user ledgers.
/// Instances are confined to a single episode.
class ScenarioDatabase {
  public:
    std::string scenario_id;
    std::map<CatalogKind, std::vector<CatalogRecord>> catalog;
    std::map<LedgerKind, std::vector<UserLedger>> ledgers;

    const std::vector<CatalogRecord> &records(CatalogKind kind) const;
    std::vector<CatalogRecord> &records(CatalogKind kind);

    const CatalogRecord *find_record(CatalogKind kind, std::string_view normalized_name) const;
    CatalogRecord *find_record(CatalogKind kind, std::string_view normalized_name);

    /// Normalized names of one collection in stored order.
    std::vector<std::string> names(CatalogKind kind) const;

    const UserLedger *find_ledger(LedgerKind kind, std::string_view user_id) const;
    UserLedger *find_ledger(LedgerKind kind, std::string_view user_id);
    /// Returns the user's ledger, creating an empty one when absent.
    UserLedger &ledger_for(LedgerKind kind, std::string_view user_id);

    bool operator==(const ScenarioDatabase &) const = default;
};

/// Diagnostics gathered while loading a scenario document.
struct LoadReport {
    std::vector<std::string> dangling; // "<collection>/<user_id>: <item>"
};

/// Parses a scenario document. Throws SchemaError / IntegrityError.
ScenarioDatabase parse_database(const Json &doc, std::string scenario_id, LoadReport *report = nullptr);

/// Loads a scenario file; the scenario id defaults to the file stem.
ScenarioDatabase load_database(const std::filesystem::path &path, LoadReport *report = nullptr,
                               std::optional<std::string> scenario_id = std::nullopt);

/// Re-checks value invariants (used after write tools).
void validate_database(const ScenarioDatabase &db);

/// Scenario document form (inverse of parse_database up to normalization).
Json to_json(const ScenarioDatabase &db);

struct StateDigest {
    std::string digest; // lowercase hex SHA-256
    std::vector<std::string> covered_collections;

    bool operator==(const StateDigest &o) const { return digest == o.digest; }
};

/// Canonical byte serialization hashed by snapshot(). Empty ledgers and
/// empty collections are omitted, so "no cart" and "empty cart" coincide.
std::string canonical_form(const ScenarioDatabase &db);

StateDigest snapshot(const ScenarioDatabase &db);

/// Restores `db` to `pristine`. Throws ScenarioMismatch on differing ids.
void reset(ScenarioDatabase &db, const ScenarioDatabase &pristine);

/// True iff both snapshots are equal. Throws ScenarioMismatch.
bool states_equivalent(const ScenarioDatabase &a, const ScenarioDatabase &b);

/// Canonical text of an arbitrary JSON value (sorted keys, 6-decimal numbers).
std::string canonical_json(const Json &value);

std::string sha256_hex(std::string_view bytes);

} // namespace egoharness
