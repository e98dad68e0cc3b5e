#include "egoharness/scenario_store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

namespace {

constexpr std::array kCatalogKinds = {CatalogKind::Products, CatalogKind::Dishes, CatalogKind::Recipes,
                                      CatalogKind::Ingredients, CatalogKind::SetMeals};
constexpr std::array kLedgerKinds = {LedgerKind::Cart, LedgerKind::Order, LedgerKind::ShoppingList,
                                     LedgerKind::Menu};

// Keys that may name the entity an item refers to, in lookup order.
constexpr std::array<std::string_view, 6> kItemNameKeys = {"product_name", "dish_name",      "ingredient_name",
                                                           "recipe_name",  "set_meal_name", "name"};

const std::set<std::string, std::less<>> kRecordKeys = {
    "name",  "category",  "price",     "tax_rate", "discount", "taste", "nutritional_characteristics",
    "country_of_origin", "allergens", "nutrition"};

double require_number(const Json &j, std::string_view key, std::string_view context) {
    if (!j.is_number()) throw SchemaError(std::string(context) + ": '" + std::string(key) + "' must be a number");
    return j.get<double>();
}

std::string require_string(const Json &j, std::string_view key, std::string_view context) {
    if (!j.is_string()) throw SchemaError(std::string(context) + ": '" + std::string(key) + "' must be a string");
    return j.get<std::string>();
}

std::vector<std::string> string_list(const Json &j, std::string_view key, std::string_view context) {
    if (!j.is_array()) throw SchemaError(std::string(context) + ": '" + std::string(key) + "' must be a list");
    std::vector<std::string> out;
    for (const auto &v : j) out.push_back(require_string(v, key, context));
    return out;
}

void check_record_values(const CatalogRecord &r, std::string_view context) {
    auto where = std::string(context) + " '" + r.name + "'";
    if (r.price && *r.price < 0) throw IntegrityError(where + ": negative price");
    if (r.tax_rate && *r.tax_rate < 0) throw IntegrityError(where + ": negative tax_rate");
    if (r.discount && (*r.discount < 0 || *r.discount > 1))
        throw IntegrityError(where + ": discount outside [0, 1]");
    if (r.nutrition) {
        const auto &n = *r.nutrition;
        if (n.basis == NutritionBasis::Total) throw IntegrityError(where + ": TOTAL nutrition stored in catalog");
        for (double v : {n.serving_size_g, n.calories_kcal, n.protein_g, n.fat_g, n.carbs_g, n.sugar_g, n.sodium_mg,
                         n.fiber_g})
            if (v < 0) throw IntegrityError(where + ": negative nutrition component");
    }
}

void check_item_values(const LedgerItem &item, std::string_view context) {
    auto where = std::string(context) + " item '" + item.name + "'";
    if (!(item.quantity > 0)) throw IntegrityError(where + ": quantity must be positive");
    if (item.price && *item.price < 0) throw IntegrityError(where + ": negative price");
    if (item.tax_rate && *item.tax_rate < 0) throw IntegrityError(where + ": negative tax_rate");
    if (item.discount && (*item.discount < 0 || *item.discount > 1))
        throw IntegrityError(where + ": discount outside [0, 1]");
}

CatalogRecord parse_record(const Json &j, std::string_view context) {
    if (!j.is_object()) throw SchemaError(std::string(context) + ": record must be an object");
    if (!j.contains("name")) throw SchemaError(std::string(context) + ": record missing 'name'");
    CatalogRecord r;
    r.name = normalize_name(require_string(j.at("name"), "name", context));
    if (r.name.empty()) throw SchemaError(std::string(context) + ": empty record name");
    auto ctx = std::string(context) + " '" + r.name + "'";
    if (j.contains("category")) r.category = require_string(j.at("category"), "category", ctx);
    if (j.contains("price")) r.price = require_number(j.at("price"), "price", ctx);
    if (j.contains("tax_rate")) r.tax_rate = require_number(j.at("tax_rate"), "tax_rate", ctx);
    if (j.contains("discount")) r.discount = require_number(j.at("discount"), "discount", ctx);
    if (j.contains("taste")) r.taste = string_list(j.at("taste"), "taste", ctx);
    if (j.contains("nutritional_characteristics"))
        r.nutritional_characteristics =
            string_list(j.at("nutritional_characteristics"), "nutritional_characteristics", ctx);
    if (j.contains("country_of_origin") && !j.at("country_of_origin").is_null())
        r.country_of_origin = require_string(j.at("country_of_origin"), "country_of_origin", ctx);
    if (j.contains("allergens")) r.allergens = string_list(j.at("allergens"), "allergens", ctx);
    if (j.contains("nutrition")) r.nutrition = nutrition_from_json(j.at("nutrition"), ctx);
    for (const auto &[key, value] : j.items())
        if (!kRecordKeys.contains(key)) r.extra[key] = value;
    check_record_values(r, context);
    return r;
}

LedgerItem parse_item(const Json &j, std::string_view context) {
    LedgerItem item;
    if (j.is_string()) { // menus list bare recipe names
        item.name = normalize_name(j.get<std::string>());
        item.name_key = "recipe_name";
        return item;
    }
    if (!j.is_object()) throw SchemaError(std::string(context) + ": ledger item must be an object or name");
    bool named = false;
    for (auto key : kItemNameKeys) {
        if (auto it = j.find(std::string(key)); it != j.end()) {
            item.name = normalize_name(require_string(*it, key, context));
            item.name_key = std::string(key);
            named = true;
            break;
        }
    }
    if (!named) throw SchemaError(std::string(context) + ": ledger item missing a name field");
    for (const auto &[key, value] : j.items()) {
        if (key == item.name_key) continue;
        if (key == "quantity" || key == "qty")
            item.quantity = require_number(value, key, context);
        else if (key == "category")
            item.category = require_string(value, key, context);
        else if (key == "price")
            item.price = require_number(value, key, context);
        else if (key == "tax_rate")
            item.tax_rate = require_number(value, key, context);
        else if (key == "discount")
            item.discount = require_number(value, key, context);
        else
            item.extra[key] = value;
    }
    check_item_values(item, context);
    return item;
}

UserLedger parse_ledger(const Json &j, LedgerKind kind, std::string_view context) {
    if (!j.is_object()) throw SchemaError(std::string(context) + ": ledger must be an object");
    if (!j.contains("user_id")) throw SchemaError(std::string(context) + ": ledger missing 'user_id'");
    UserLedger ledger;
    ledger.user_id = require_string(j.at("user_id"), "user_id", context);
    auto ctx = std::string(context) + "/" + ledger.user_id;
    const char *items_key = kind == LedgerKind::Menu && j.contains("recipes") ? "recipes" : "items";
    if (!j.contains(items_key)) throw SchemaError(ctx + ": ledger missing '" + items_key + "'");
    const auto &items = j.at(items_key);
    if (!items.is_array()) throw SchemaError(ctx + ": '" + items_key + "' must be a list");
    for (const auto &item : items) ledger.items.push_back(parse_item(item, ctx));
    for (const auto &[key, value] : j.items())
        if (key != "user_id" && key != items_key) ledger.extra[key] = value;
    return ledger;
}

std::optional<CatalogKind> catalog_kind_for(std::string_view key) {
    for (auto k : kCatalogKinds)
        if (collection_key(k) == key) return k;
    return std::nullopt;
}

std::optional<LedgerKind> ledger_kind_for(std::string_view key) {
    for (auto k : kLedgerKinds)
        if (collection_key(k) == key) return k;
    return std::nullopt;
}

Json record_to_json(const CatalogRecord &r, bool sort_sets) {
    Json j = r.extra;
    j["name"] = r.name;
    if (!r.category.empty()) j["category"] = r.category;
    if (r.price) j["price"] = *r.price;
    if (r.tax_rate) j["tax_rate"] = *r.tax_rate;
    if (r.discount) j["discount"] = *r.discount;
    auto set_list = [&](const char *key, std::vector<std::string> values) {
        if (values.empty()) return;
        if (sort_sets) std::sort(values.begin(), values.end());
        j[key] = values;
    };
    set_list("taste", r.taste);
    set_list("nutritional_characteristics", r.nutritional_characteristics);
    set_list("allergens", r.allergens);
    if (r.country_of_origin) j["country_of_origin"] = *r.country_of_origin;
    if (r.nutrition) j["nutrition"] = to_json(*r.nutrition);
    return j;
}

Json item_to_json(const LedgerItem &item, bool with_name_key) {
    Json j = item.extra;
    j[with_name_key ? item.name_key : "name"] = item.name;
    j["quantity"] = item.quantity;
    if (item.category) j["category"] = *item.category;
    if (item.price) j["price"] = *item.price;
    if (item.tax_rate) j["tax_rate"] = *item.tax_rate;
    if (item.discount) j["discount"] = *item.discount;
    return j;
}

void write_canonical(const Json &v, std::string &out) {
    switch (v.type()) {
    case Json::value_t::object: {
        out.push_back('{');
        bool first = true;
        for (const auto &[key, value] : v.items()) { // nlohmann objects iterate in key order
            if (!first) out.push_back(',');
            first = false;
            out += Json(key).dump();
            out.push_back(':');
            write_canonical(value, out);
        }
        out.push_back('}');
        break;
    }
    case Json::value_t::array: {
        out.push_back('[');
        bool first = true;
        for (const auto &value : v) {
            if (!first) out.push_back(',');
            first = false;
            write_canonical(value, out);
        }
        out.push_back(']');
        break;
    }
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
    case Json::value_t::number_float:
        out += format_fixed(v.get<double>(), 6);
        break;
    default:
        out += v.dump();
    }
}

} // namespace

NutritionFacts NutritionFacts::zero_total() {
    NutritionFacts n;
    n.basis = NutritionBasis::Total;
    n.serving_size_g = 0.0;
    return n;
}

void NutritionFacts::accumulate(const NutritionFacts &o, double factor) {
    serving_size_g += o.serving_size_g * factor;
    calories_kcal += o.calories_kcal * factor;
    protein_g += o.protein_g * factor;
    fat_g += o.fat_g * factor;
    carbs_g += o.carbs_g * factor;
    sugar_g += o.sugar_g * factor;
    sodium_mg += o.sodium_mg * factor;
    fiber_g += o.fiber_g * factor;
}

Json to_json(const NutritionFacts &n) {
    return Json{{"basis", n.basis == NutritionBasis::Total ? "TOTAL" : "PER_100G"},
                {"serving_size_g", n.serving_size_g},
                {"calories_kcal", n.calories_kcal},
                {"protein_g", n.protein_g},
                {"fat_g", n.fat_g},
                {"carbs_g", n.carbs_g},
                {"sugar_g", n.sugar_g},
                {"sodium_mg", n.sodium_mg},
                {"fiber_g", n.fiber_g}};
}

NutritionFacts nutrition_from_json(const Json &j, std::string_view context) {
    auto ctx = std::string(context) + " nutrition";
    if (!j.is_object()) throw SchemaError(ctx + " must be an object");
    NutritionFacts n;
    if (j.contains("basis")) {
        auto basis = require_string(j.at("basis"), "basis", ctx);
        if (basis == "PER_100G")
            n.basis = NutritionBasis::Per100g;
        else if (basis == "TOTAL")
            n.basis = NutritionBasis::Total;
        else
            throw SchemaError(ctx + ": unknown basis '" + basis + "'");
    }
    auto field = [&](const char *key, double &slot) {
        if (j.contains(key)) slot = require_number(j.at(key), key, ctx);
    };
    field("serving_size_g", n.serving_size_g);
    field("calories_kcal", n.calories_kcal);
    field("protein_g", n.protein_g);
    field("fat_g", n.fat_g);
    field("carbs_g", n.carbs_g);
    field("sugar_g", n.sugar_g);
    field("sodium_mg", n.sodium_mg);
    field("fiber_g", n.fiber_g);
    return n;
}

std::string_view collection_key(CatalogKind kind) {
    switch (kind) {
    case CatalogKind::Products: return "products";
    case CatalogKind::Dishes: return "dishes";
    case CatalogKind::Recipes: return "recipes";
    case CatalogKind::Ingredients: return "ingredients";
    case CatalogKind::SetMeals: return "set_meals";
    }
    return "?";
}

std::string_view collection_key(LedgerKind kind) {
    switch (kind) {
    case LedgerKind::Cart: return "user_carts";
    case LedgerKind::Order: return "user_orders";
    case LedgerKind::ShoppingList: return "user_shopping_lists";
    case LedgerKind::Menu: return "user_menus";
    }
    return "?";
}

const std::vector<CatalogRecord> &ScenarioDatabase::records(CatalogKind kind) const {
    static const std::vector<CatalogRecord> empty;
    auto it = catalog.find(kind);
    return it == catalog.end() ? empty : it->second;
}

std::vector<CatalogRecord> &ScenarioDatabase::records(CatalogKind kind) { return catalog[kind]; }

const CatalogRecord *ScenarioDatabase::find_record(CatalogKind kind, std::string_view name) const {
    const auto &recs = records(kind);
    auto it = std::find_if(recs.begin(), recs.end(), [&](const CatalogRecord &r) { return r.name == name; });
    return it == recs.end() ? nullptr : &*it;
}

CatalogRecord *ScenarioDatabase::find_record(CatalogKind kind, std::string_view name) {
    auto it = catalog.find(kind);
    if (it == catalog.end()) return nullptr;
    auto &recs = it->second;
    auto rec = std::find_if(recs.begin(), recs.end(), [&](const CatalogRecord &r) { return r.name == name; });
    return rec == recs.end() ? nullptr : &*rec;
}

std::vector<std::string> ScenarioDatabase::names(CatalogKind kind) const {
    std::vector<std::string> out;
    for (const auto &r : records(kind)) out.push_back(r.name);
    return out;
}

const UserLedger *ScenarioDatabase::find_ledger(LedgerKind kind, std::string_view user_id) const {
    auto it = ledgers.find(kind);
    if (it == ledgers.end()) return nullptr;
    for (const auto &l : it->second)
        if (l.user_id == user_id) return &l;
    return nullptr;
}

UserLedger *ScenarioDatabase::find_ledger(LedgerKind kind, std::string_view user_id) {
    auto it = ledgers.find(kind);
    if (it == ledgers.end()) return nullptr;
    for (auto &l : it->second)
        if (l.user_id == user_id) return &l;
    return nullptr;
}

UserLedger &ScenarioDatabase::ledger_for(LedgerKind kind, std::string_view user_id) {
    if (auto *existing = find_ledger(kind, user_id)) return *existing;
    auto &list = ledgers[kind];
    list.push_back(UserLedger{std::string(user_id), {}, Json::object()});
    return list.back();
}

ScenarioDatabase parse_database(const Json &doc, std::string scenario_id, LoadReport *report) {
    if (!doc.is_object()) throw SchemaError("scenario document must be an object");
    ScenarioDatabase db;
    db.scenario_id = std::move(scenario_id);
    for (const auto &[key, value] : doc.items()) {
        if (!value.is_array()) throw SchemaError("collection '" + key + "' must be a list");
        if (auto ck = catalog_kind_for(key)) {
            auto &recs = db.catalog[*ck];
            std::set<std::string> seen;
            for (const auto &rec : value) {
                auto r = parse_record(rec, key);
                if (!seen.insert(r.name).second) throw IntegrityError(key + ": duplicate name '" + r.name + "'");
                recs.push_back(std::move(r));
            }
        } else if (auto lk = ledger_kind_for(key)) {
            auto &list = db.ledgers[*lk];
            std::set<std::string> seen;
            for (const auto &l : value) {
                auto ledger = parse_ledger(l, *lk, key);
                if (!seen.insert(ledger.user_id).second)
                    throw IntegrityError(key + ": duplicate ledger for user '" + ledger.user_id + "'");
                list.push_back(std::move(ledger));
            }
        } else {
            throw SchemaError("unknown top-level collection '" + key + "'");
        }
    }

    LoadReport local;
    for (const auto &[kind, list] : db.ledgers) {
        for (const auto &ledger : list) {
            for (const auto &item : ledger.items) {
                bool resolved = std::any_of(kCatalogKinds.begin(), kCatalogKinds.end(),
                                            [&](CatalogKind ck) { return db.find_record(ck, item.name) != nullptr; });
                if (!resolved)
                    local.dangling.push_back(std::string(collection_key(kind)) + "/" + ledger.user_id + ": " +
                                             item.name);
            }
        }
    }
    for (const auto &d : local.dangling) spdlog::debug("scenario '{}': dangling reference {}", db.scenario_id, d);
    if (report) *report = std::move(local);
    return db;
}

ScenarioDatabase load_database(const std::filesystem::path &path, LoadReport *report,
                               std::optional<std::string> scenario_id) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error &e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return parse_database(doc, scenario_id.value_or(path.stem().string()), report);
}

void validate_database(const ScenarioDatabase &db) {
    for (const auto &[kind, recs] : db.catalog) {
        std::set<std::string> seen;
        for (const auto &r : recs) {
            if (!seen.insert(r.name).second)
                throw IntegrityError(std::string(collection_key(kind)) + ": duplicate name '" + r.name + "'");
            check_record_values(r, collection_key(kind));
        }
    }
    for (const auto &[kind, list] : db.ledgers) {
        std::set<std::string> seen;
        for (const auto &l : list) {
            if (!seen.insert(l.user_id).second)
                throw IntegrityError(std::string(collection_key(kind)) + ": duplicate ledger '" + l.user_id + "'");
            for (const auto &item : l.items) check_item_values(item, collection_key(kind));
        }
    }
}

Json to_json(const ScenarioDatabase &db) {
    Json doc = Json::object();
    for (const auto &[kind, recs] : db.catalog) {
        Json arr = Json::array();
        for (const auto &r : recs) arr.push_back(record_to_json(r, false));
        doc[std::string(collection_key(kind))] = std::move(arr);
    }
    for (const auto &[kind, list] : db.ledgers) {
        Json arr = Json::array();
        for (const auto &l : list) {
            Json lj = l.extra;
            lj["user_id"] = l.user_id;
            Json items = Json::array();
            for (const auto &item : l.items) items.push_back(item_to_json(item, true));
            lj["items"] = std::move(items);
            arr.push_back(std::move(lj));
        }
        doc[std::string(collection_key(kind))] = std::move(arr);
    }
    return doc;
}

std::string canonical_json(const Json &value) {
    std::string out;
    write_canonical(value, out);
    return out;
}

std::string canonical_form(const ScenarioDatabase &db) {
    std::string out = "scenario:" + Json(db.scenario_id).dump() + "\n";
    for (const auto &[kind, recs] : db.catalog) {
        if (recs.empty()) continue;
        std::vector<std::string> lines;
        for (const auto &r : recs) lines.push_back(canonical_json(record_to_json(r, true)));
        std::sort(lines.begin(), lines.end());
        out += "catalog:" + std::string(collection_key(kind)) + "\n";
        for (const auto &l : lines) out += l + "\n";
    }
    for (const auto &[kind, list] : db.ledgers) {
        std::vector<std::pair<std::string, std::string>> entries; // (user_id, body)
        for (const auto &l : list) {
            if (l.items.empty()) continue;
            std::vector<std::pair<std::string, std::string>> items;
            for (const auto &item : l.items) items.emplace_back(item.name, canonical_json(item_to_json(item, false)));
            std::sort(items.begin(), items.end());
            std::string body = canonical_json(l.extra) + "\n";
            for (const auto &[_, text] : items) body += "  " + text + "\n";
            entries.emplace_back(l.user_id, std::move(body));
        }
        if (entries.empty()) continue;
        std::sort(entries.begin(), entries.end());
        out += "ledger:" + std::string(collection_key(kind)) + "\n";
        for (const auto &[user, body] : entries) out += " user:" + Json(user).dump() + " " + body;
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

StateDigest snapshot(const ScenarioDatabase &db) {
    StateDigest d;
    d.digest = sha256_hex(canonical_form(db));
    for (const auto &[kind, recs] : db.catalog)
        if (!recs.empty()) d.covered_collections.emplace_back(collection_key(kind));
    for (const auto &[kind, list] : db.ledgers)
        if (std::any_of(list.begin(), list.end(), [](const UserLedger &l) { return !l.items.empty(); }))
            d.covered_collections.emplace_back(collection_key(kind));
    return d;
}

void reset(ScenarioDatabase &db, const ScenarioDatabase &pristine) {
    if (db.scenario_id != pristine.scenario_id)
        throw ScenarioMismatch("cannot reset '" + db.scenario_id + "' from '" + pristine.scenario_id + "'");
    db = pristine;
}

bool states_equivalent(const ScenarioDatabase &a, const ScenarioDatabase &b) {
    if (a.scenario_id != b.scenario_id)
        throw ScenarioMismatch("'" + a.scenario_id + "' vs '" + b.scenario_id + "'");
    return snapshot(a) == snapshot(b);
}

} // namespace egoharness
