#include <algorithm>
#include <map>

#include "egoharness/errors.hpp"
#include "egoharness/toolsets.hpp"
#include "toolset_support.hpp"

namespace egoharness {

using namespace detail;

namespace {

constexpr auto kRecipes = CatalogKind::Recipes;
constexpr auto kIngredients = CatalogKind::Ingredients;

Json extra_field(const CatalogRecord &r, const char *key) {
    auto it = r.extra.find(key);
    return it == r.extra.end() ? Json() : *it;
}

std::vector<std::string> recipe_ingredient_names(const CatalogRecord &recipe) {
    std::vector<std::string> out;
    auto list = extra_field(recipe, "ingredients");
    if (!list.is_array()) return out;
    for (const auto &i : list) {
        if (i.is_string())
            out.push_back(normalize_name(i.get<std::string>()));
        else if (i.is_object() && i.contains("ingredient_name"))
            out.push_back(normalize_name(i.at("ingredient_name").get<std::string>()));
    }
    return out;
}

ToolHandler recipe_attribute(std::string field, std::function<Json(const CatalogRecord &)> get) {
    return [field = std::move(field), get = std::move(get)](const ToolInvocation &inv) {
        return read_attribute(inv, kRecipes, "recipe_name", "recipes", "recipe", str_param(inv, "recipe_name"),
                              {{field, get}});
    };
}

ToolHandler ingredient_attribute(
    std::vector<std::pair<std::string, std::function<Json(const CatalogRecord &)>>> fields) {
    return [fields = std::move(fields)](const ToolInvocation &inv) {
        return read_attribute(inv, kIngredients, "ingredient_name", "ingredients", "ingredient",
                              str_param(inv, "ingredient_name"), fields);
    };
}

Json success(const std::string &msg, Json extra = Json::object()) {
    extra["status"] = "success";
    extra["message"] = msg;
    return extra;
}

Json menu_names(const UserLedger *menu) {
    Json names = Json::array();
    if (menu)
        for (const auto &item : menu->items) names.push_back(item.name);
    return names;
}

ToolResult tally(const ToolInvocation &inv, const char *out_key,
                 const std::function<const std::vector<std::string> &(const CatalogRecord &)> &tags) {
    std::map<std::string, int> counts;
    Json details = Json::array();
    std::vector<std::string> unresolved;
    for (const auto &raw : str_list_param(inv, "recipe_names")) {
        auto name = normalize_name(raw);
        const auto *r = inv.view.find_record(kRecipes, name);
        if (!r) {
            unresolved.push_back(name);
            continue;
        }
        for (const auto &t : tags(*r)) ++counts[t];
        details.push_back({{"recipe_name", r->name}});
    }
    return calc_result(Json{{"user_id", str_param(inv, "user_id")}, {out_key, counts}, {"details", std::move(details)}},
                       unresolved, "recipe(s)");
}

PricedLineView gram_scaled() {
    auto pricing = plain_pricing();
    pricing.nutrition = [](const CatalogRecord &r) -> std::optional<NutritionFacts> {
        if (!r.nutrition) return std::nullopt;
        auto per_gram = *r.nutrition;
        double serving = per_gram.serving_size_g > 0 ? per_gram.serving_size_g : 100.0;
        auto out = NutritionFacts::zero_total();
        out.accumulate(per_gram, 1.0 / serving);
        out.serving_size_g = 1.0;
        return out;
    };
    return pricing;
}

} // namespace

ToolRegistry kitchen_toolset() {
    ToolsetBuilder b("kitchen");
    auto recipe = [] { return p_string("recipe_name", "Name of the recipe"); };
    auto ingredient = [] { return p_string("ingredient_name", "Name of the ingredient"); };
    auto recipe_names = [](const ToolInvocation &inv, const std::function<bool(const CatalogRecord &)> &pred) {
        return list_names(inv, kRecipes, "recipe_names", pred);
    };
    auto ingredient_names = [](const ToolInvocation &inv, const std::function<bool(const CatalogRecord &)> &pred) {
        return list_names(inv, kIngredients, "ingredient_names", pred);
    };

    b.add("get_cooking_steps", ToolKind::Read, "Get the cooking steps of a recipe.", {recipe()},
          recipe_attribute("steps", [](const CatalogRecord &r) { return extra_field(r, "steps"); }));
    b.add("get_recipe_allergens", ToolKind::Read, "Get the allergens of a recipe.", {recipe()},
          recipe_attribute("allergens", [](const CatalogRecord &r) { return Json(r.allergens); }));
    b.add("find_recipes_by_allergen", ToolKind::Read, "Find recipes that contain an allergen.", {p_string("allergen")},
          [=](const ToolInvocation &inv) {
              auto a = str_param(inv, "allergen");
              return recipe_names(inv, [&](const CatalogRecord &r) { return has_tag(r.allergens, a); });
          });
    b.add("get_recipe_taste", ToolKind::Read, "Get the taste profile of a recipe.", {recipe()},
          recipe_attribute("taste", [](const CatalogRecord &r) { return Json(r.taste); }));
    b.add("find_recipes_by_taste", ToolKind::Read, "Find recipes with a given taste.", {p_string("taste")},
          [=](const ToolInvocation &inv) {
              auto t = str_param(inv, "taste");
              return recipe_names(inv, [&](const CatalogRecord &r) { return has_tag(r.taste, t); });
          });
    b.add("get_recipe_ingredients", ToolKind::Read, "Get the ingredients of a recipe.", {recipe()},
          recipe_attribute("ingredients", [](const CatalogRecord &r) { return extra_field(r, "ingredients"); }));
    b.add("find_recipes_by_ingredient", ToolKind::Read, "Find recipes that use an ingredient (fuzzy match).",
          {ingredient()}, [=](const ToolInvocation &inv) {
              auto q = str_param(inv, "ingredient_name");
              return recipe_names(inv, [&](const CatalogRecord &r) {
                  return !fuzzy_match(q, recipe_ingredient_names(r), inv.token_threshold).empty();
              });
          });
    b.add("get_recipe_nutritional_characteristics", ToolKind::Read, "Get the nutritional characteristics of a recipe.",
          {recipe()}, recipe_attribute("nutritional_characteristics", [](const CatalogRecord &r) {
              return Json(r.nutritional_characteristics);
          }));
    b.add("find_recipes_by_nutritional_characteristics", ToolKind::Read,
          "Find recipes carrying a nutritional characteristic.", {p_string("nutritional_characteristic")},
          [=](const ToolInvocation &inv) {
              auto t = str_param(inv, "nutritional_characteristic");
              return recipe_names(inv, [&](const CatalogRecord &r) { return has_tag(r.nutritional_characteristics, t); });
          });
    b.add("get_all_recipe_names", ToolKind::Read, "List every recipe.", {},
          [=](const ToolInvocation &inv) { return recipe_names(inv, [](const CatalogRecord &) { return true; }); });
    b.add("get_ingredient_shelf_life", ToolKind::Read, "Get the shelf life and expiry date of an ingredient.",
          {ingredient()},
          ingredient_attribute({{"shelf_life_days", [](const CatalogRecord &r) { return extra_field(r, "shelf_life_days"); }},
                                {"expiry_date", [](const CatalogRecord &r) { return extra_field(r, "expiry_date"); }}}));
    b.add("find_ingredients_by_expiry_date", ToolKind::Read,
          "Find ingredients expiring on or before a date (YYYY-MM-DD).", {p_string("expiry_date")},
          [=](const ToolInvocation &inv) {
              auto limit = str_param(inv, "expiry_date");
              return ingredient_names(inv, [&](const CatalogRecord &r) {
                  auto d = extra_field(r, "expiry_date");
                  return d.is_string() && d.get<std::string>() <= limit;
              });
          });
    b.add("get_ingredient_location", ToolKind::Read, "Get where an ingredient is stored.", {ingredient()},
          ingredient_attribute(
              {{"storage_location", [](const CatalogRecord &r) { return extra_field(r, "storage_location"); }}}));
    b.add("find_ingredients_by_location", ToolKind::Read, "Find ingredients stored at a location.",
          {p_string("storage_location")}, [=](const ToolInvocation &inv) {
              auto loc = tag_key(str_param(inv, "storage_location"));
              return ingredient_names(inv, [&](const CatalogRecord &r) {
                  auto l = extra_field(r, "storage_location");
                  return l.is_string() && tag_key(l.get<std::string>()) == loc;
              });
          });
    b.add("get_ingredient_nutrition", ToolKind::Read, "Get nutrition facts of an ingredient.", {ingredient()},
          ingredient_attribute({{"nutrition", [](const CatalogRecord &r) { return nutrition_json(r.nutrition); }}}));
    b.add("get_ingredient_quantity", ToolKind::Read, "Get the stock quantity of an ingredient.", {ingredient()},
          ingredient_attribute({{"quantity", [](const CatalogRecord &r) { return extra_field(r, "quantity"); }},
                                {"unit", [](const CatalogRecord &r) { return extra_field(r, "unit"); }}}));
    b.add("get_all_ingredient_names", ToolKind::Read, "List every ingredient in stock.", {},
          [=](const ToolInvocation &inv) { return ingredient_names(inv, [](const CatalogRecord &) { return true; }); });
    b.add("get_ingredients_by_category", ToolKind::Read, "Find ingredients in a category.", {p_string("category")},
          [=](const ToolInvocation &inv) {
              auto cat = tag_key(str_param(inv, "category"));
              return ingredient_names(inv, [&](const CatalogRecord &r) { return tag_key(r.category) == cat; });
          });
    b.add("find_ingredient_category", ToolKind::Read, "Get the category of an ingredient.", {ingredient()},
          ingredient_attribute({{"category", [](const CatalogRecord &r) { return Json(r.category); }}}));
    b.add("get_current_menu", ToolKind::Read, "Get a user's current menu.", {p_string("user_id", kUserIdDoc)},
          [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              return ToolResult::success(
                  Json{{"user_id", user}, {"menu", menu_names(inv.view.find_ledger(LedgerKind::Menu, user))}});
          });
    b.add("get_current_shopping_list", ToolKind::Read, "Get a user's shopping list.",
          {p_string("user_id", kUserIdDoc)}, [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              Json items = Json::array();
              if (const auto *l = inv.view.find_ledger(LedgerKind::ShoppingList, user))
                  for (const auto &i : l->items)
                      items.push_back({{"ingredient_name", i.name}, {"quantity", num(i.quantity)}});
              return ToolResult::success(Json{{"user_id", user}, {"shopping_list", std::move(items)}});
          });

    b.add("add_recipe_to_menu", ToolKind::Write, "Add a recipe to a user's menu.", {p_string("user_id"), recipe()},
          [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              auto name = normalize_name(str_param(inv, "recipe_name"));
              if (!inv.view.find_record(kRecipes, name)) return ToolResult::error("Recipe '" + name + "' not found.");
              auto &menu = inv.db->ledger_for(LedgerKind::Menu, user);
              if (std::any_of(menu.items.begin(), menu.items.end(), [&](const LedgerItem &i) { return i.name == name; }))
                  return ToolResult::error("Recipe '" + name + "' is already on the menu.");
              LedgerItem item;
              item.name = name;
              item.name_key = "recipe_name";
              menu.items.push_back(item);
              auto msg = "Recipe '" + name + "' added to menu.";
              return ToolResult::success(success(msg, Json{{"menu", menu_names(&menu)}}), msg);
          });
    b.add("remove_recipe_from_menu", ToolKind::Write, "Remove a recipe from a user's menu.",
          {p_string("user_id"), recipe()}, [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              auto name = normalize_name(str_param(inv, "recipe_name"));
              auto *menu = inv.db->find_ledger(LedgerKind::Menu, user);
              if (!menu || std::erase_if(menu->items, [&](const LedgerItem &i) { return i.name == name; }) == 0)
                  return ToolResult::error("Recipe '" + name + "' is not on the menu.");
              auto msg = "Recipe '" + name + "' removed from menu.";
              return ToolResult::success(success(msg, Json{{"menu", menu_names(menu)}}), msg);
          });
    b.add("add_to_shopping_list", ToolKind::Write, "Add quantity of an ingredient to a user's shopping list.",
          {p_string("user_id"), ingredient(), positive(p_number("quantity"))}, [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              auto name = normalize_name(str_param(inv, "ingredient_name"));
              double qty = num_param(inv, "quantity");
              auto &list = inv.db->ledger_for(LedgerKind::ShoppingList, user);
              auto it = std::find_if(list.items.begin(), list.items.end(), [&](const LedgerItem &i) { return i.name == name; });
              if (it != list.items.end()) {
                  it->quantity += qty;
              } else {
                  LedgerItem item;
                  item.name = name;
                  item.quantity = qty;
                  item.name_key = "ingredient_name";
                  list.items.push_back(item);
              }
              auto msg = "Added " + num(qty).dump() + " of '" + name + "' to shopping list.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("remove_from_shopping_list", ToolKind::Write,
          "Remove an ingredient from a user's shopping list (all of it when quantity is omitted).",
          {p_string("user_id"), ingredient(), optional(positive(p_number("quantity")))}, [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              auto name = normalize_name(str_param(inv, "ingredient_name"));
              auto *list = inv.db->find_ledger(LedgerKind::ShoppingList, user);
              if (!list) return ToolResult::error("'" + name + "' is not on the shopping list.");
              auto it = std::find_if(list->items.begin(), list->items.end(), [&](const LedgerItem &i) { return i.name == name; });
              if (it == list->items.end()) return ToolResult::error("'" + name + "' is not on the shopping list.");
              double qty = opt_num_param(inv, "quantity").value_or(it->quantity);
              if (qty > it->quantity + 1e-9) return ToolResult::error("Cannot remove more than listed.");
              it->quantity -= qty;
              if (it->quantity <= 1e-12) list->items.erase(it);
              auto msg = "Removed " + num(qty).dump() + " of '" + name + "' from shopping list.";
              return ToolResult::success(success(msg), msg);
          });

    auto recipe_list = [] {
        return std::vector<ParamSpec>{p_string("user_id", kUserIdDoc),
                                      p_list("recipe_names", string_items(), "Recipes to tally")};
    };
    b.add("tally_total_nutritional_characteristics", ToolKind::Calc,
          "Count nutritional characteristics across the given recipes.", recipe_list(), [](const ToolInvocation &inv) {
              return tally(inv, "nutritional_characteristics",
                           [](const CatalogRecord &r) -> const std::vector<std::string> & {
                               return r.nutritional_characteristics;
                           });
          });
    b.add("tally_total_tastes", ToolKind::Calc, "Count tastes across the given recipes.", recipe_list(),
          [](const ToolInvocation &inv) {
              return tally(inv, "tastes",
                           [](const CatalogRecord &r) -> const std::vector<std::string> & { return r.taste; });
          });
    b.add("compute_total_nutritions", ToolKind::Calc,
          "Compute total nutrition for ingredient amounts given in grams.",
          {p_string("user_id", kUserIdDoc),
           p_list("ingredients", named_quantity_items("ingredient_name", "quantity_g", "number"),
                  "Ingredients with amounts in grams")},
          [](const ToolInvocation &inv) {
              auto lines = resolve_exact(inv.view, inv.params.at("ingredients"), "ingredient_name", "quantity_g",
                                         {kIngredients});
              return nutrition_result(str_param(inv, "user_id"), lines, "ingredient_name", "ingredient(s)",
                                      gram_scaled());
          });
    return b.build();
}

ToolRegistry toolset_for(std::string_view kind) {
    if (kind == "retail") return retail_toolset();
    if (kind == "restaurant") return restaurant_toolset();
    if (kind == "order") return order_toolset();
    if (kind == "kitchen") return kitchen_toolset();
    throw ConfigError("unknown scenario kind '" + std::string(kind) + "'");
}

std::vector<std::string> builtin_toolset_names() { return {"retail", "restaurant", "order", "kitchen"}; }

} // namespace egoharness
