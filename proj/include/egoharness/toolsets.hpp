#pragma once

#include <string>
#include <vector>

#include "egoharness/tool_registry.hpp"

namespace egoharness {

ToolRegistry retail_toolset();
ToolRegistry restaurant_toolset();
/// Restaurant tools plus order-level totals computed from the stored order.
ToolRegistry order_toolset();
ToolRegistry kitchen_toolset();

/// "retail", "restaurant", "order" or "kitchen". Throws ConfigError.
ToolRegistry toolset_for(std::string_view scenario_kind);

std::vector<std::string> builtin_toolset_names();

} // namespace egoharness
