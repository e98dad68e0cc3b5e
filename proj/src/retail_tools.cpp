#include <algorithm>

#include "egoharness/toolsets.hpp"
#include "toolset_support.hpp"

namespace egoharness {

using namespace detail;

namespace {

constexpr auto kProducts = CatalogKind::Products;

Json cart_item_json(const LedgerItem &item) {
    Json j{{"product_name", item.name}, {"quantity", num(item.quantity)}};
    if (item.category) j["category"] = *item.category;
    if (item.price) j["price"] = num(*item.price);
    if (item.tax_rate) j["tax_rate"] = num(*item.tax_rate);
    if (item.discount) j["discount"] = num(*item.discount);
    return j;
}

ToolHandler attribute(std::string field, std::function<Json(const CatalogRecord &)> get) {
    return [field = std::move(field), get = std::move(get)](const ToolInvocation &inv) {
        return read_attribute(inv, kProducts, "product_name", "products", "product",
                              str_param(inv, "product_name"), {{field, get}});
    };
}

ToolResult add_to_cart(const ToolInvocation &inv) {
    auto user = str_param(inv, "user_id");
    auto raw_name = str_param(inv, "product_name");
    LedgerItem item;
    item.name = normalize_name(raw_name);
    item.quantity = num_param(inv, "qty");
    item.category = str_param(inv, "category");
    item.price = num_param(inv, "price");
    item.tax_rate = num_param(inv, "tax_rate");
    item.discount = num_param(inv, "discount");
    auto &ledger = inv.db->ledger_for(LedgerKind::Cart, user);
    auto same = std::find_if(ledger.items.begin(), ledger.items.end(), [&](const LedgerItem &l) {
        return l.name == item.name && l.category == item.category && l.price == item.price &&
               l.tax_rate == item.tax_rate && l.discount == item.discount && l.extra == item.extra;
    });
    if (same != ledger.items.end())
        same->quantity += item.quantity;
    else
        ledger.items.push_back(item);
    auto msg = "Added " + num(item.quantity).dump() + " of '" + raw_name + "' to user '" + user + "' cart.";
    return ToolResult::success(Json{{"status", "success"}, {"message", msg}}, msg);
}

ToolResult remove_from_cart(const ToolInvocation &inv) {
    auto user = str_param(inv, "user_id");
    auto raw_name = str_param(inv, "product_name");
    auto name = normalize_name(raw_name);
    double qty = num_param(inv, "qty");
    auto *ledger = inv.db->find_ledger(LedgerKind::Cart, user);
    double held = 0.0;
    if (ledger)
        for (const auto &l : ledger->items)
            if (l.name == name) held += l.quantity;
    if (held == 0.0) return ToolResult::error("Product '" + raw_name + "' is not in user '" + user + "' cart.");
    if (qty > held + 1e-9)
        return ToolResult::error("Cannot remove " + num(qty).dump() + " of '" + raw_name + "'; the cart holds " +
                                 num(held).dump() + ".");
    double left = qty;
    for (auto it = ledger->items.rbegin(); it != ledger->items.rend() && left > 1e-12; ++it) {
        if (it->name != name) continue;
        double take = std::min(it->quantity, left);
        it->quantity -= take;
        left -= take;
    }
    std::erase_if(ledger->items, [](const LedgerItem &l) { return l.quantity <= 1e-12; });
    auto msg = "Removed " + num(qty).dump() + " of '" + raw_name + "' from user '" + user + "' cart.";
    return ToolResult::success(Json{{"status", "success"}, {"message", msg}}, msg);
}

ToolResult clear_cart(const ToolInvocation &inv) {
    auto user = str_param(inv, "user_id");
    if (auto *ledger = inv.db->find_ledger(LedgerKind::Cart, user)) ledger->items.clear();
    auto msg = "Cleared cart for user '" + user + "'.";
    return ToolResult::success(Json{{"status", "success"}, {"message", msg}}, msg);
}

ToolResult add_product(const ToolInvocation &inv) {
    auto r = record_from_params(inv, "product_name", "nutritional_characteristics");
    if (inv.db->find_record(kProducts, r.name)) return ToolResult::error("Product '" + r.name + "' already exists.");
    inv.db->records(kProducts).push_back(r);
    auto msg = "Product '" + r.name + "' added to catalog.";
    return ToolResult::success(Json{{"status", "success"}, {"message", msg}}, msg);
}

ToolResult delete_product(const ToolInvocation &inv) {
    auto name = normalize_name(str_param(inv, "product_name"));
    auto &recs = inv.db->records(kProducts);
    auto n = std::erase_if(recs, [&](const CatalogRecord &r) { return r.name == name; });
    if (n == 0) return ToolResult::error("Product '" + name + "' not found in catalog.");
    auto msg = "Product '" + name + "' deleted from catalog.";
    return ToolResult::success(Json{{"status", "success"}, {"message", msg}}, msg);
}

std::vector<ParamSpec> calc_params() {
    return {p_string("user_id", kUserIdDoc),
            p_list("products", named_quantity_items("product_name", "quantity", "integer"),
                   "List of products to calculate for")};
}

CalcLines calc_lines(const ToolInvocation &inv) {
    return resolve_exact(inv.view, inv.params.at("products"), "product_name", "quantity", {kProducts});
}

} // namespace

ToolRegistry retail_toolset() {
    ToolsetBuilder b("retail");
    auto name = [] { return p_string("product_name", "Name of the product"); };

    b.add("get_nutrition", ToolKind::Read, "Get nutrition facts of a product (fuzzy name match).", {name()},
          attribute("nutrition", [](const CatalogRecord &r) { return nutrition_json(r.nutrition); }));
    b.add("get_price", ToolKind::Read, "Get the shelf price (tax included) of a product.", {name()},
          attribute("price", [](const CatalogRecord &r) { return r.price ? num(*r.price) : Json(); }));
    b.add("get_tax_rate", ToolKind::Read, "Get the tax rate of a product.", {name()},
          attribute("tax_rate", [](const CatalogRecord &r) { return r.tax_rate ? num(*r.tax_rate) : Json(); }));
    b.add("get_category", ToolKind::Read, "Get the category of a product.", {name()},
          attribute("category", [](const CatalogRecord &r) { return Json(r.category); }));
    b.add("get_discount", ToolKind::Read, "Get the discount factor of a product.", {name()},
          attribute("discount", [](const CatalogRecord &r) { return r.discount ? num(*r.discount) : Json(); }));
    b.add("get_cart", ToolKind::Read, "Get the items in a user's cart.", {p_string("user_id", kUserIdDoc)},
          [](const ToolInvocation &inv) {
              Json items = Json::array();
              if (const auto *l = inv.view.find_ledger(LedgerKind::Cart, str_param(inv, "user_id")))
                  for (const auto &item : l->items) items.push_back(cart_item_json(item));
              return ToolResult::success(Json{{"cart_items", std::move(items)}});
          });
    b.add("get_shopping_list", ToolKind::Read, "Get the items in a user's shopping list.",
          {p_string("user_id", kUserIdDoc)}, [](const ToolInvocation &inv) {
              Json items = Json::array();
              if (const auto *l = inv.view.find_ledger(LedgerKind::ShoppingList, str_param(inv, "user_id")))
                  for (const auto &item : l->items)
                      items.push_back({{"product_name", item.name}, {"quantity", num(item.quantity)}});
              return ToolResult::success(Json{{"shopping_list", std::move(items)}});
          });
    b.add("find_products_by_nutritional_characteristic", ToolKind::Read,
          "Find products carrying a nutritional characteristic (e.g. low_fat).",
          {p_string("nutritional_characteristic")}, [](const ToolInvocation &inv) {
              auto tag = str_param(inv, "nutritional_characteristic");
              return list_names(inv, kProducts, "product_names",
                                [&](const CatalogRecord &r) { return has_tag(r.nutritional_characteristics, tag); });
          });
    b.add("find_products_by_taste", ToolKind::Read, "Find products with a given taste (e.g. bitter).",
          {p_string("taste")}, [](const ToolInvocation &inv) {
              auto taste = str_param(inv, "taste");
              return list_names(inv, kProducts, "product_names",
                                [&](const CatalogRecord &r) { return has_tag(r.taste, taste); });
          });
    b.add("find_products_by_country_of_origin", ToolKind::Read, "Find products from a country.",
          {p_string("country_of_origin")}, [](const ToolInvocation &inv) {
              auto country = tag_key(str_param(inv, "country_of_origin"));
              return list_names(inv, kProducts, "product_names", [&](const CatalogRecord &r) {
                  return r.country_of_origin && tag_key(*r.country_of_origin) == country;
              });
          });
    b.add("find_products_by_price_range", ToolKind::Read, "Find products whose shelf price lies within [min, max].",
          {non_negative(p_number("min_price")), non_negative(p_number("max_price"))}, [](const ToolInvocation &inv) {
              double lo = num_param(inv, "min_price");
              double hi = num_param(inv, "max_price");
              return list_names(inv, kProducts, "product_names",
                                [&](const CatalogRecord &r) { return r.price && *r.price >= lo && *r.price <= hi; });
          });
    b.add("list_discounted_products", ToolKind::Read, "List products sold below full price.", {},
          [](const ToolInvocation &inv) {
              Json rows = Json::array();
              for (const auto &r : inv.view.records(kProducts))
                  if (r.discount && *r.discount < 1.0)
                      rows.push_back({{"product_name", r.name}, {"discount", num(*r.discount)}});
              auto count = rows.size();
              return ToolResult::success(Json{{"products", std::move(rows)}, {"count", count}});
          });

    b.add("add_product", ToolKind::Write, "Add a new product to the catalog.",
          {name(), p_string("category"), non_negative(p_number("price", "Shelf price including tax.")),
           non_negative(p_number("tax_rate")), fraction(p_number("discount")),
           optional(p_list("taste", string_items())), optional(p_list("nutritional_characteristics", string_items())),
           optional(p_string("country_of_origin")), optional(p_list("allergens", string_items())),
           optional(p_object("nutrition", "Nutrition facts per 100 g."))},
          add_product);
    b.add("delete_product", ToolKind::Write, "Delete a product from the catalog.", {name()}, delete_product);
    b.add("add_to_cart", ToolKind::Write, "Add quantity of a product to a user's cart.",
          {p_string("user_id"), p_string("product_name"), positive(p_number("qty")), p_string("category"),
           non_negative(p_number("price", "Shelf price including tax.")),
           non_negative(p_number("tax_rate", "Tax rate (e.g., 0.08 for 8%).")),
           fraction(p_number("discount", "Discount factor: final amount = price * discount."))},
          add_to_cart);
    b.add("remove_from_cart", ToolKind::Write, "Remove quantity of a product from a user's cart.",
          {p_string("user_id"), p_string("product_name"), positive(p_number("qty"))}, remove_from_cart);
    b.add("clear_cart", ToolKind::Write, "Remove every item from a user's cart.", {p_string("user_id")}, clear_cart);

    b.add("compute_total_payment", ToolKind::Calc,
          "Compute total payable amount for the specified products: sum(price * discount * qty).", calc_params(),
          [](const ToolInvocation &inv) {
              return payment_result(str_param(inv, "user_id"), calc_lines(inv), "product_name", "product(s)",
                                    plain_pricing());
          });
    b.add("compute_total_tax", ToolKind::Calc,
          "Compute the tax contained in the payable amount: price * discount * qty * tax_rate / (1 + tax_rate).",
          calc_params(), [](const ToolInvocation &inv) {
              return tax_result(str_param(inv, "user_id"), calc_lines(inv), "product_name", "product(s)",
                                plain_pricing());
          });
    b.add("compute_total_nutrition", ToolKind::Calc,
          "Compute total nutrition for the specified products, one serving per unit.", calc_params(),
          [](const ToolInvocation &inv) {
              return nutrition_result(str_param(inv, "user_id"), calc_lines(inv), "product_name", "product(s)",
                                      plain_pricing());
          });
    return b.build();
}

} // namespace egoharness
