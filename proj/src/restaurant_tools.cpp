#include <algorithm>

#include "egoharness/errors.hpp"
#include "egoharness/toolsets.hpp"
#include "toolset_support.hpp"

namespace egoharness {

using namespace detail;

namespace {

constexpr auto kDishes = CatalogKind::Dishes;
constexpr auto kSetMeals = CatalogKind::SetMeals;

std::vector<std::string> meal_dishes(const CatalogRecord &meal) {
    std::vector<std::string> out;
    if (auto it = meal.extra.find("dishes"); it != meal.extra.end() && it->is_array())
        for (const auto &d : *it) out.push_back(normalize_name(d.get<std::string>()));
    return out;
}

/// Set meals derive nutrition from their dishes; dishes price themselves.
PricedLineView menu_pricing(const ScenarioDatabase &view) {
    auto pricing = plain_pricing();
    pricing.nutrition = [&view](const CatalogRecord &r) -> std::optional<NutritionFacts> {
        if (r.nutrition) return r.nutrition;
        auto dishes = meal_dishes(r);
        if (dishes.empty()) return std::nullopt;
        auto total = NutritionFacts::zero_total();
        for (const auto &d : dishes)
            if (const auto *dish = view.find_record(kDishes, d); dish && dish->nutrition) total.accumulate(*dish->nutrition, 1.0);
        return total;
    };
    return pricing;
}

ToolHandler dish_attribute(std::string field, std::function<Json(const CatalogRecord &)> get) {
    return [field = std::move(field), get = std::move(get)](const ToolInvocation &inv) {
        return read_attribute(inv, kDishes, "dish_name", "dishes", "dish", str_param(inv, "dish_name"), {{field, get}});
    };
}

Json success(const std::string &msg, Json extra = Json::object()) {
    extra["status"] = "success";
    extra["message"] = msg;
    return extra;
}

ToolResult add_to_order(const ToolInvocation &inv, CatalogKind kind, const char *name_key, const char *noun) {
    auto user = str_param(inv, "user_id");
    auto name = normalize_name(str_param(inv, name_key));
    if (!inv.view.find_record(kind, name))
        return ToolResult::error(std::string(noun) + " '" + name + "' not found in catalog.");
    double qty = num_param(inv, "quantity");
    auto &ledger = inv.db->ledger_for(LedgerKind::Order, user);
    auto it = std::find_if(ledger.items.begin(), ledger.items.end(),
                           [&](const LedgerItem &l) { return l.name == name && l.name_key == name_key; });
    if (it != ledger.items.end()) {
        it->quantity += qty;
    } else {
        LedgerItem item;
        item.name = name;
        item.quantity = qty;
        item.name_key = name_key;
        if (kind == kSetMeals) item.extra["item_type"] = "set_meal";
        ledger.items.push_back(std::move(item));
    }
    auto msg = "Added " + num(qty).dump() + " of '" + name + "' to user '" + user + "' order.";
    return ToolResult::success(success(msg), msg);
}

CalcLines order_lines(const ScenarioDatabase &view, const std::string &user) {
    Json items = Json::array();
    if (const auto *l = view.find_ledger(LedgerKind::Order, user))
        for (const auto &item : l->items) items.push_back({{"name", item.name}, {"quantity", item.quantity}});
    return resolve_exact(view, items, "name", "quantity", {kDishes, kSetMeals});
}

std::vector<ParamSpec> calc_params() {
    return {p_string("user_id", kUserIdDoc),
            p_list("dishes", named_quantity_items("dish_name", "quantity", "integer"),
                   "List of dishes or set meals to calculate for")};
}

CalcLines calc_lines(const ToolInvocation &inv) {
    return resolve_exact(inv.view, inv.params.at("dishes"), "dish_name", "quantity", {kDishes, kSetMeals});
}

} // namespace

ToolRegistry restaurant_toolset() {
    ToolsetBuilder b("restaurant");
    auto dish = [] { return p_string("dish_name", "Name of the dish"); };

    b.add("get_dish_nutrition", ToolKind::Read, "Get nutrition facts of a dish (fuzzy name match).", {dish()},
          dish_attribute("nutrition", [](const CatalogRecord &r) { return nutrition_json(r.nutrition); }));
    b.add("get_dish_allergens", ToolKind::Read, "Get the allergens of a dish.", {dish()},
          dish_attribute("allergens", [](const CatalogRecord &r) { return Json(r.allergens); }));
    b.add("get_dish_taste_profile", ToolKind::Read, "Get the taste profile of a dish.", {dish()},
          dish_attribute("taste", [](const CatalogRecord &r) { return Json(r.taste); }));
    b.add("get_dish_price", ToolKind::Read, "Get the menu price (tax included) of a dish.", {dish()},
          dish_attribute("price", [](const CatalogRecord &r) { return r.price ? num(*r.price) : Json(); }));
    b.add("get_dish_discount", ToolKind::Read, "Get the discount factor of a dish.", {dish()},
          dish_attribute("discount", [](const CatalogRecord &r) { return r.discount ? num(*r.discount) : Json(); }));
    b.add("get_set_meal_details", ToolKind::Read, "Get the dishes, price and discount of a set meal.",
          {p_string("set_meal_name")}, [](const ToolInvocation &inv) {
              return read_attribute(inv, kSetMeals, "set_meal_name", "set_meals", "set meal",
                                    str_param(inv, "set_meal_name"),
                                    {{"dishes", [](const CatalogRecord &r) { return Json(meal_dishes(r)); }},
                                     {"price", [](const CatalogRecord &r) { return r.price ? num(*r.price) : Json(); }},
                                     {"discount",
                                      [](const CatalogRecord &r) { return r.discount ? num(*r.discount) : Json(); }}});
          });
    b.add("find_set_meals_containing_dish", ToolKind::Read, "Find set meals that include a dish.", {dish()},
          [](const ToolInvocation &inv) {
              auto hits = resolve_fuzzy(inv, kDishes, str_param(inv, "dish_name"));
              return list_names(inv, kSetMeals, "set_meal_names", [&](const CatalogRecord &meal) {
                  auto dishes = meal_dishes(meal);
                  return std::any_of(hits.begin(), hits.end(), [&](const CatalogRecord *d) {
                      return std::find(dishes.begin(), dishes.end(), d->name) != dishes.end();
                  });
              });
          });
    b.add("get_user_order_summary", ToolKind::Read, "Get the current order of a user.",
          {p_string("user_id", kUserIdDoc)}, [](const ToolInvocation &inv) {
              Json items = Json::array();
              if (const auto *l = inv.view.find_ledger(LedgerKind::Order, str_param(inv, "user_id")))
                  for (const auto &item : l->items)
                      items.push_back({{item.name_key, item.name}, {"quantity", num(item.quantity)}});
              auto count = items.size();
              return ToolResult::success(Json{{"order_items", std::move(items)}, {"count", count}});
          });
    b.add("find_dishes_by_category", ToolKind::Read, "Find dishes in a category.", {p_string("category")},
          [](const ToolInvocation &inv) {
              auto cat = tag_key(str_param(inv, "category"));
              return list_names(inv, kDishes, "dish_names",
                                [&](const CatalogRecord &r) { return tag_key(r.category) == cat; });
          });
    b.add("find_dishes_by_nutritional_tag", ToolKind::Read, "Find dishes carrying a nutritional tag.",
          {p_string("nutritional_tag")}, [](const ToolInvocation &inv) {
              auto tag = str_param(inv, "nutritional_tag");
              return list_names(inv, kDishes, "dish_names",
                                [&](const CatalogRecord &r) { return has_tag(r.nutritional_characteristics, tag); });
          });
    b.add("find_dishes_by_taste", ToolKind::Read, "Find dishes with a given taste.", {p_string("taste")},
          [](const ToolInvocation &inv) {
              auto taste = str_param(inv, "taste");
              return list_names(inv, kDishes, "dish_names",
                                [&](const CatalogRecord &r) { return has_tag(r.taste, taste); });
          });
    b.add("filter_dishes_by_price_range", ToolKind::Read, "Find dishes whose price lies within [min, max].",
          {non_negative(p_number("min_price")), non_negative(p_number("max_price"))}, [](const ToolInvocation &inv) {
              double lo = num_param(inv, "min_price");
              double hi = num_param(inv, "max_price");
              return list_names(inv, kDishes, "dish_names",
                                [&](const CatalogRecord &r) { return r.price && *r.price >= lo && *r.price <= hi; });
          });
    b.add("list_all_discounted_dishes", ToolKind::Read, "List dishes sold below full price.", {},
          [](const ToolInvocation &inv) {
              Json rows = Json::array();
              for (const auto &r : inv.view.records(kDishes))
                  if (r.discount && *r.discount < 1.0)
                      rows.push_back({{"dish_name", r.name}, {"discount", num(*r.discount)}});
              auto count = rows.size();
              return ToolResult::success(Json{{"dishes", std::move(rows)}, {"count", count}});
          });

    b.add("add_dish_to_catalog", ToolKind::Write, "Add a new dish to the menu catalog.",
          {dish(), p_string("category"), non_negative(p_number("price", "Menu price including tax.")),
           non_negative(p_number("tax_rate")), fraction(p_number("discount")),
           optional(p_list("taste", string_items())), optional(p_list("nutritional_tags", string_items())),
           optional(p_list("allergens", string_items())), optional(p_object("nutrition"))},
          [](const ToolInvocation &inv) {
              auto r = record_from_params(inv, "dish_name", "nutritional_tags");
              if (inv.view.find_record(kDishes, r.name)) return ToolResult::error("Dish '" + r.name + "' already exists.");
              inv.db->records(kDishes).push_back(r);
              auto msg = "Dish '" + r.name + "' added to catalog.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("remove_dish_from_catalog", ToolKind::Write, "Remove a dish from the menu catalog.", {dish()},
          [](const ToolInvocation &inv) {
              auto name = normalize_name(str_param(inv, "dish_name"));
              if (std::erase_if(inv.db->records(kDishes), [&](const CatalogRecord &r) { return r.name == name; }) == 0)
                  return ToolResult::error("Dish '" + name + "' not found in catalog.");
              auto msg = "Dish '" + name + "' removed from catalog.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("update_dish_price", ToolKind::Write, "Set a new price for a dish.",
          {dish(), non_negative(p_number("new_price"))}, [](const ToolInvocation &inv) {
              auto name = normalize_name(str_param(inv, "dish_name"));
              auto *r = inv.db->find_record(kDishes, name);
              if (!r) return ToolResult::error("Dish '" + name + "' not found in catalog.");
              r->price = num_param(inv, "new_price");
              auto msg = "Price of '" + name + "' updated to " + num(*r->price).dump() + ".";
              return ToolResult::success(success(msg), msg);
          });
    b.add("update_dish_discount", ToolKind::Write, "Set a new discount factor for a dish.",
          {dish(), fraction(p_number("new_discount"))}, [](const ToolInvocation &inv) {
              auto name = normalize_name(str_param(inv, "dish_name"));
              auto *r = inv.db->find_record(kDishes, name);
              if (!r) return ToolResult::error("Dish '" + name + "' not found in catalog.");
              r->discount = num_param(inv, "new_discount");
              auto msg = "Discount of '" + name + "' updated to " + num(*r->discount).dump() + ".";
              return ToolResult::success(success(msg), msg);
          });
    b.add("create_set_meal", ToolKind::Write, "Create a set meal from existing dishes.",
          {p_string("set_meal_name"), p_list("dish_names", string_items()),
           non_negative(p_number("price", "Set price including tax.")), optional(fraction(p_number("discount"))),
           optional(non_negative(p_number("tax_rate")))},
          [](const ToolInvocation &inv) {
              CatalogRecord meal;
              meal.name = normalize_name(str_param(inv, "set_meal_name"));
              if (inv.view.find_record(kSetMeals, meal.name))
                  return ToolResult::error("Set meal '" + meal.name + "' already exists.");
              Json dishes = Json::array();
              for (const auto &d : str_list_param(inv, "dish_names")) {
                  auto n = normalize_name(d);
                  if (!inv.view.find_record(kDishes, n)) return ToolResult::error("Dish '" + n + "' not found in catalog.");
                  dishes.push_back(n);
              }
              meal.category = "set meal";
              meal.extra["dishes"] = std::move(dishes);
              meal.price = num_param(inv, "price");
              meal.discount = opt_num_param(inv, "discount");
              meal.tax_rate = opt_num_param(inv, "tax_rate");
              inv.db->records(kSetMeals).push_back(meal);
              auto msg = "Set meal '" + meal.name + "' created.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("add_dish_to_order", ToolKind::Write, "Add quantity of a dish to a user's order.",
          {p_string("user_id"), dish(), positive(p_integer("quantity"))},
          [](const ToolInvocation &inv) { return add_to_order(inv, kDishes, "dish_name", "Dish"); });
    b.add("remove_dish_from_order", ToolKind::Write,
          "Remove quantity of a dish or set meal from a user's order (all of it when quantity is omitted).",
          {p_string("user_id"), dish(), optional(positive(p_integer("quantity")))}, [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              auto name = normalize_name(str_param(inv, "dish_name"));
              auto *l = inv.db->find_ledger(LedgerKind::Order, user);
              auto it = l ? std::find_if(l->items.begin(), l->items.end(),
                                         [&](const LedgerItem &i) { return i.name == name; })
                          : decltype(l->items.begin()){};
              if (!l || it == l->items.end())
                  return ToolResult::error("'" + name + "' is not in user '" + user + "' order.");
              double qty = opt_num_param(inv, "quantity").value_or(it->quantity);
              if (qty > it->quantity + 1e-9) return ToolResult::error("Cannot remove more than ordered.");
              it->quantity -= qty;
              if (it->quantity <= 1e-12) l->items.erase(it);
              auto msg = "Removed " + num(qty).dump() + " of '" + name + "' from user '" + user + "' order.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("clear_user_order", ToolKind::Write, "Remove every item from a user's order.", {p_string("user_id")},
          [](const ToolInvocation &inv) {
              auto user = str_param(inv, "user_id");
              if (auto *l = inv.db->find_ledger(LedgerKind::Order, user)) l->items.clear();
              auto msg = "Cleared order for user '" + user + "'.";
              return ToolResult::success(success(msg), msg);
          });
    b.add("add_set_meal_to_order", ToolKind::Write, "Add quantity of a set meal to a user's order.",
          {p_string("user_id"), p_string("set_meal_name"), positive(p_integer("quantity"))},
          [](const ToolInvocation &inv) { return add_to_order(inv, kSetMeals, "set_meal_name", "Set meal"); });

    b.add("compute_total_payment", ToolKind::Calc,
          "Compute total payable amount for the specified dishes: sum(price * discount * qty).", calc_params(),
          [](const ToolInvocation &inv) {
              return payment_result(str_param(inv, "user_id"), calc_lines(inv), "dish_name", "dish(es)",
                                    menu_pricing(inv.view));
          });
    b.add("compute_total_tax", ToolKind::Calc,
          "Compute the tax contained in the payable amount: price * discount * qty * tax_rate / (1 + tax_rate).",
          calc_params(), [](const ToolInvocation &inv) {
              return tax_result(str_param(inv, "user_id"), calc_lines(inv), "dish_name", "dish(es)",
                                menu_pricing(inv.view));
          });
    b.add("compute_total_nutrition", ToolKind::Calc, "Compute total nutrition for the specified dishes.",
          calc_params(), [](const ToolInvocation &inv) {
              return nutrition_result(str_param(inv, "user_id"), calc_lines(inv), "dish_name", "dish(es)",
                                      menu_pricing(inv.view));
          });
    return b.build();
}

ToolRegistry order_toolset() {
    ToolsetBuilder b("order");
    b.extend(restaurant_toolset());
    auto user = [] { return std::vector<ParamSpec>{p_string("user_id", kUserIdDoc)}; };
    b.add("calculate_order_total", ToolKind::Calc, "Compute the payable amount of a user's current order.", user(),
          [](const ToolInvocation &inv) {
              auto id = str_param(inv, "user_id");
              return payment_result(id, order_lines(inv.view, id), "dish_name", "dish(es)", menu_pricing(inv.view));
          });
    b.add("calculate_order_tax", ToolKind::Calc, "Compute the tax contained in a user's current order.", user(),
          [](const ToolInvocation &inv) {
              auto id = str_param(inv, "user_id");
              return tax_result(id, order_lines(inv.view, id), "dish_name", "dish(es)", menu_pricing(inv.view));
          });
    b.add("summarize_order_nutrition", ToolKind::Calc, "Compute total nutrition of a user's current order.", user(),
          [](const ToolInvocation &inv) {
              auto id = str_param(inv, "user_id");
              return nutrition_result(id, order_lines(inv.view, id), "dish_name", "dish(es)", menu_pricing(inv.view));
          });
    return b.build();
}

} // namespace egoharness
