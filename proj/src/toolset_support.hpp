#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egoharness/fuzzy_match.hpp"
#include "egoharness/normalize.hpp"
#include "egoharness/tool_registry.hpp"

namespace egoharness::detail {

ParamSpec p_string(std::string name, std::string description = {});
ParamSpec p_number(std::string name, std::string description = {});
ParamSpec p_integer(std::string name, std::string description = {});
ParamSpec p_list(std::string name, Json items, std::string description = {}, bool unordered = true);
ParamSpec p_object(std::string name, std::string description = {});
ParamSpec optional(ParamSpec p);
ParamSpec positive(ParamSpec p);
ParamSpec non_negative(ParamSpec p);
ParamSpec fraction(ParamSpec p);

Json string_items();
/// Element schema {name_key: string, qty_key: number/integer}.
Json named_quantity_items(const std::string &name_key, const std::string &qty_key, const std::string &qty_type);

class ToolsetBuilder {
  public:
    explicit ToolsetBuilder(std::string name) : name_(std::move(name)) {}
    ToolsetBuilder &add(std::string tool_name, ToolKind kind, std::string description, std::vector<ParamSpec> params,
                        ToolHandler handler);
    ToolsetBuilder &extend(const ToolRegistry &other);
    ToolRegistry build();

  private:
    std::string name_;
    std::vector<ToolEntry> entries_;
};

/// Integral values render as integers, the rest as floating point.
Json num(double value);
double round2(double value);

/// Tag comparison key: normalized, with '_' and '-' read as spaces.
std::string tag_key(std::string_view tag);
bool has_tag(const std::vector<std::string> &tags, std::string_view wanted);

std::string str_param(const ToolInvocation &inv, const char *key);
double num_param(const ToolInvocation &inv, const char *key);
std::optional<double> opt_num_param(const ToolInvocation &inv, const char *key);
std::vector<std::string> str_list_param(const ToolInvocation &inv, const char *key);

/// Records of `kind` whose names fuzzy-match `query`.
std::vector<const CatalogRecord *> resolve_fuzzy(const ToolInvocation &inv, CatalogKind kind, std::string_view query);

/// READ attribute lookup: {"<plural>": [{"<name_key>": n, "<field>": v}], "count": k}.
ToolResult read_attribute(const ToolInvocation &inv, CatalogKind kind, const std::string &name_key,
                          const std::string &plural, const std::string &noun, std::string_view query,
                          const std::vector<std::pair<std::string, std::function<Json(const CatalogRecord &)>>> &fields);

/// {"<list_key>": [names...]} of records satisfying `pred`, in catalog order.
ToolResult list_names(const ToolInvocation &inv, CatalogKind kind, const std::string &list_key,
                      const std::function<bool(const CatalogRecord &)> &pred);

Json nutrition_json(const std::optional<NutritionFacts> &n);
Json rounded_nutrition(const NutritionFacts &n);

/// Builds a catalog record from add-style parameters.
CatalogRecord record_from_params(const ToolInvocation &inv, const std::string &name_key, const char *tags_key);

struct CalcLine {
    std::string query;
    double quantity = 0.0;
    const CatalogRecord *record = nullptr;
};

struct CalcLines {
    std::vector<CalcLine> resolved;
    std::vector<std::string> unresolved;
};

/// Exact normalized resolution over the given catalog kinds, in order.
CalcLines resolve_exact(const ScenarioDatabase &view, const Json &items, const std::string &name_key,
                        const std::string &qty_key, const std::vector<CatalogKind> &kinds);

/// Wraps a calculation payload with status and message.
ToolResult calc_result(Json payload, const std::vector<std::string> &unresolved, const std::string &noun);

/// Payment / tax / nutrition over resolved lines. `price_of` etc. allow set
/// meals to price themselves and derive nutrition from their dishes.
struct PricedLineView {
    std::function<double(const CatalogRecord &)> price;
    std::function<double(const CatalogRecord &)> discount;
    std::function<double(const CatalogRecord &)> tax_rate;
    std::function<std::optional<NutritionFacts>(const CatalogRecord &)> nutrition;
};

PricedLineView plain_pricing();

ToolResult payment_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                          const std::string &noun, const PricedLineView &view);
ToolResult tax_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                      const std::string &noun, const PricedLineView &view);
ToolResult nutrition_result(const std::string &user_id, const CalcLines &lines, const std::string &name_key,
                            const std::string &noun, const PricedLineView &view);

inline const std::string kUserIdDoc = "The unique identifier of the user";

} // namespace egoharness::detail
