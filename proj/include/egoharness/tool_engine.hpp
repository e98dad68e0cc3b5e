#pragma once

#include "egoharness/fuzzy_match.hpp"
#include "egoharness/tool_registry.hpp"

namespace egoharness {

struct ExecuteOptions {
    double token_threshold = kDefaultTokenThreshold;
};

/// Runs one call. Agent-side mistakes (unknown tool, missing or mistyped
/// parameters, failed preconditions) come back as error results and leave
/// `db` untouched; WRITE tools commit all-or-nothing.
ToolResult execute(ScenarioDatabase &db, const ToolCall &call, const ToolRegistry &registry,
                   const ExecuteOptions &options = {});

/// Checks a value against the property schema subset used by tool
/// documents. Returns an empty string when valid.
std::string check_parameter(const Json &property_schema, const Json &value, const std::string &path);

} // namespace egoharness
