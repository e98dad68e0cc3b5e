#include "toolset_support.hpp"

#include <cmath>

#include "egoharness/errors.hpp"

namespace egoharness::detail {

ParamSpec p_string(std::string name, std::string description) {
    return ParamSpec{std::move(name), "string", true, std::move(description), {}, {}, {}, false, nullptr};
}

ParamSpec p_number(std::string name, std::string description) {
    return ParamSpec{std::move(name), "number", true, std::move(description), {}, {}, {}, false, nullptr};
}

ParamSpec p_integer(std::string name, std::string description) {
    return ParamSpec{std::move(name), "integer", true, std::move(description), {}, {}, {}, false, nullptr};
}

ParamSpec p_list(std::string name, Json items, std::string description, bool unordered) {
    return ParamSpec{std::move(name), "array", true, std::move(description), {}, {}, {}, unordered, std::move(items)};
}

ParamSpec p_object(std::string name, std::string description) {
    return ParamSpec{std::move(name), "object", true, std::move(description), {}, {}, {}, false, nullptr};
}

ParamSpec optional(ParamSpec p) {
    p.required = false;
    return p;
}

ParamSpec positive(ParamSpec p) {
    p.exclusive_minimum = 0.0;
    return p;
}

ParamSpec non_negative(ParamSpec p) {
    p.minimum = 0.0;
    return p;
}

ParamSpec fraction(ParamSpec p) {
    p.minimum = 0.0;
    p.maximum = 1.0;
    return p;
}

Json string_items() { return Json{{"type", "string"}}; }

Json named_quantity_items(const std::string &name_key, const std::string &qty_key, const std::string &qty_type) {
    return Json{{"type", "object"},
                {"properties", {{name_key, {{"type", "string"}}}, {qty_key, {{"type", qty_type}, {"exclusiveMinimum", 0}}}}},
                {"required", {name_key, qty_key}}};
}

ToolsetBuilder &ToolsetBuilder::add(std::string tool_name, ToolKind kind, std::string description,
                                    std::vector<ParamSpec> params, ToolHandler handler) {
    ToolSchema s{std::move(tool_name), std::move(description), kind, std::move(params), false};
    entries_.push_back(ToolEntry{std::move(s), std::move(handler)});
    return *this;
}

ToolsetBuilder &ToolsetBuilder::extend(const ToolRegistry &other) {
    for (const auto *s : other.schemas()) entries_.push_back(*other.find(s->tool_name));
    return *this;
}

ToolRegistry ToolsetBuilder::build() { return ToolRegistry(name_, std::move(entries_)); }

Json num(double value) {
    if (std::isfinite(value) && std::floor(value) == value && std::fabs(value) < 1e15)
        return Json(static_cast<std::int64_t>(value));
    return Json(value);
}

double round2(double value) { return round_half_up(value, 2); }

std::string tag_key(std::string_view tag) {
    std::string s(tag);
    for (auto &c : s)
        if (c == '_' || c == '-') c = ' ';
    return normalize_name(s);
}

bool has_tag(const std::vector<std::string> &tags, std::string_view wanted) {
    auto key = tag_key(wanted);
    for (const auto &t : tags)
        if (tag_key(t) == key) return true;
    return false;
}

std::string str_param(const ToolInvocation &inv, const char *key) { return inv.params.at(key).get<std::string>(); }

double num_param(const ToolInvocation &inv, const char *key) { return inv.params.at(key).get<double>(); }

std::optional<double> opt_num_param(const ToolInvocation &inv, const char *key) {
    auto it = inv.params.find(key);
    if (it == inv.params.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

std::vector<std::string> str_list_param(const ToolInvocation &inv, const char *key) {
    auto it = inv.params.find(key);
    if (it == inv.params.end() || it->is_null()) return {};
    return it->get<std::vector<std::string>>();
}

std::vector<const CatalogRecord *> resolve_fuzzy(const ToolInvocation &inv, CatalogKind kind, std::string_view query) {
    auto set = fuzzy_match(query, inv.view.names(kind), inv.token_threshold);
    std::vector<const CatalogRecord *> out;
    for (const auto &name : set.matches) out.push_back(inv.view.find_record(kind, name));
    return out;
}

ToolResult read_attribute(const ToolInvocation &inv, CatalogKind kind, const std::string &name_key,
                          const std::string &plural, const std::string &noun, std::string_view query,
                          const std::vector<std::pair<std::string, std::function<Json(const CatalogRecord &)>>> &fields) {
    auto hits = resolve_fuzzy(inv, kind, query);
    if (hits.empty()) return ToolResult::error("No " + noun + " found matching '" + std::string(query) + "'.");
    Json rows = Json::array();
    for (const auto *r : hits) {
        Json row{{name_key, r->name}};
        for (const auto &[field, get] : fields) row[field] = get(*r);
        rows.push_back(std::move(row));
    }
    auto count = rows.size();
    return ToolResult::success(Json{{plural, std::move(rows)}, {"count", count}});
}

ToolResult list_names(const ToolInvocation &inv, CatalogKind kind, const std::string &list_key,
                      const std::function<bool(const CatalogRecord &)> &pred) {
    Json names = Json::array();
    for (const auto &r : inv.view.records(kind))
        if (pred(r)) names.push_back(r.name);
    return ToolResult::success(Json{{list_key, std::move(names)}});
}

Json nutrition_json(const std::optional<NutritionFacts> &n) {
    if (!n) return nullptr;
    Json j = to_json(*n);
    for (auto &[key, value] : j.items())
        if (value.is_number()) value = num(value.get<double>());
    return j;
}

Json rounded_nutrition(const NutritionFacts &n) {
    Json j = to_json(n);
    for (auto &[key, value] : j.items())
        if (value.is_number()) value = round2(value.get<double>());
    return j;
}

CatalogRecord record_from_params(const ToolInvocation &inv, const std::string &name_key, const char *tags_key) {
    CatalogRecord r;
    r.name = normalize_name(inv.params.at(name_key).get<std::string>());
    r.category = inv.params.value("category", "");
    r.price = opt_num_param(inv, "price");
    r.tax_rate = opt_num_param(inv, "tax_rate");
    r.discount = opt_num_param(inv, "discount");
    r.taste = str_list_param(inv, "taste");
    r.nutritional_characteristics = str_list_param(inv, tags_key);
    r.allergens = str_list_param(inv, "allergens");
    if (auto it = inv.params.find("country_of_origin"); it != inv.params.end() && it->is_string())
        r.country_of_origin = it->get<std::string>();
    if (auto it = inv.params.find("nutrition"); it != inv.params.end() && !it->is_null())
        r.nutrition = nutrition_from_json(*it, r.name);
    return r;
}

CalcLines resolve_exact(const ScenarioDatabase &view, const Json &items, const std::string &name_key,
                        const std::string &qty_key, const std::vector<CatalogKind> &kinds) {
    CalcLines out;
    for (const auto &item : items) {
        CalcLine line;
        line.query = normalize_name(item.at(name_key).get<std::string>());
        line.quantity = item.at(qty_key).get<double>();
        for (auto k : kinds) {
            if ((line.record = view.find_record(k, line.query))) break;
        }
        if (line.record)
            out.resolved.push_back(std::move(line));
        else
            out.unresolved.push_back(line.query);
    }
    return out;
}

ToolResult calc_result(Json payload, const std::vector<std::string> &unresolved, const std::string &noun) {
    ToolResult r;
    if (unresolved.empty()) {
        r.status = ToolStatus::Success;
        r.message = "Calculation completed successfully.";
    } else {
        std::string names;
        for (const auto &n : unresolved) names += (names.empty() ? "" : ", ") + n;
        r.status = ToolStatus::PartialSuccess;
        r.message = "Calculated successfully. However, " + std::to_string(unresolved.size()) + " " + noun +
                    " not found in catalog: " + names;
    }
    payload["status"] = to_string(r.status);
    payload["message"] = r.message;
    r.payload = std::move(payload);
    return r;
}

PricedLineView plain_pricing() {
    return PricedLineView{[](const CatalogRecord &r) { return r.price.value_or(0.0); },
                          [](const CatalogRecord &r) { return r.discount.value_or(1.0); },
                          [](const CatalogRecord &r) { return r.tax_rate.value_or(0.0); },
                          [](const CatalogRecord &r) { return r.nutrition; }};
}

ToolResult payment_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                          const std::string &noun, const PricedLineView &view) {
    double total = 0.0;
    Json details = Json::array();
    for (const auto &l : lines.resolved) {
        double amount = view.price(*l.record) * view.discount(*l.record) * l.quantity;
        total += amount;
        details.push_back({{name_key, l.record->name}, {"quantity", num(l.quantity)}, {"subtotal", round2(amount)}});
    }
    return calc_result(Json{{"user_id", user_id}, {"total", round2(total)}, {"details", std::move(details)}},
                       lines.unresolved, noun);
}

ToolResult tax_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                      const std::string &noun, const PricedLineView &view) {
    double total = 0.0;
    Json details = Json::array();
    for (const auto &l : lines.resolved) {
        double amount = view.price(*l.record) * view.discount(*l.record) * l.quantity;
        double rate = view.tax_rate(*l.record);
        double tax = round2(amount * rate / (1.0 + rate));
        total += tax;
        details.push_back({{name_key, l.record->name}, {"quantity", num(l.quantity)}, {"tax_amount", tax}});
    }
    return calc_result(Json{{"user_id", user_id}, {"total_tax", round2(total)}, {"details", std::move(details)}},
                       lines.unresolved, noun);
}

ToolResult nutrition_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                            const std::string &noun, const PricedLineView &view) {
    auto total = NutritionFacts::zero_total();
    Json details = Json::array();
    for (const auto &l : lines.resolved) {
        if (auto n = view.nutrition(*l.record)) total.accumulate(*n, l.quantity);
        details.push_back({{name_key, l.record->name}, {"quantity", num(l.quantity)}});
    }
    return calc_result(
        Json{{"user_id", user_id}, {"total_nutrition", rounded_nutrition(total)}, {"details", std::move(details)}},
        lines.unresolved, noun);
}

} // namespace egoharness::detail
