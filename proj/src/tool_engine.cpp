#include "egoharness/tool_engine.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"

namespace egoharness {

namespace {

bool type_matches(const std::string &type, const Json &v) {
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer")
        return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
    if (type == "boolean") return v.is_boolean();
    if (type == "array") return v.is_array();
    if (type == "object") return v.is_object();
    return true;
}

} // namespace

std::string check_parameter(const Json &schema, const Json &value, const std::string &path) {
    auto type = schema.value("type", "");
    if (!type.empty() && !type_matches(type, value)) return "parameter '" + path + "' must be of type " + type;
    if (value.is_number()) {
        double x = value.get<double>();
        if (schema.contains("minimum") && x < schema.at("minimum").get<double>())
            return "parameter '" + path + "' is below its minimum";
        if (schema.contains("exclusiveMinimum") && x <= schema.at("exclusiveMinimum").get<double>())
            return "parameter '" + path + "' must be greater than " + schema.at("exclusiveMinimum").dump();
        if (schema.contains("maximum") && x > schema.at("maximum").get<double>())
            return "parameter '" + path + "' is above its maximum";
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            auto err = check_parameter(schema.at("items"), value[i], path + "[" + std::to_string(i) + "]");
            if (!err.empty()) return err;
        }
    }
    if (value.is_object() && schema.contains("properties")) {
        for (const auto &req : schema.value("required", Json::array()))
            if (!value.contains(req.get<std::string>()))
                return "parameter '" + path + "' is missing field '" + req.get<std::string>() + "'";
        for (const auto &[key, sub] : schema.at("properties").items()) {
            if (!value.contains(key)) continue;
            auto err = check_parameter(sub, value.at(key), path + "." + key);
            if (!err.empty()) return err;
        }
    }
    return {};
}

ToolResult execute(ScenarioDatabase &db, const ToolCall &call, const ToolRegistry &registry,
                   const ExecuteOptions &options) {
    const auto *entry = registry.find(call.tool_name);
    if (!entry) return ToolResult::error("Unknown tool: " + call.tool_name);
    const auto &schema = entry->schema;
    if (!call.parameters.is_object()) return ToolResult::error("Parameters must be an object.");

    for (const auto &p : schema.params)
        if (p.required && !call.parameters.contains(p.name))
            return ToolResult::error("Missing required parameter: " + p.name);
    const Json props = schema.to_document()["function"]["parameters"]["properties"];
    for (const auto &[key, value] : call.parameters.items()) {
        if (!props.contains(key)) {
            if (!schema.additional_properties) return ToolResult::error("Unexpected parameter: " + key);
            continue;
        }
        if (value.is_null() && !schema.param(key)->required) continue;
        auto err = check_parameter(props.at(key), value, key);
        if (!err.empty()) return ToolResult::error("Invalid " + err + ".");
    }
    if (!entry->handler) return ToolResult::error("Tool '" + schema.tool_name + "' has no implementation.");

    try {
        if (schema.kind != ToolKind::Write) {
            ToolInvocation inv{db, nullptr, call.parameters, options.token_threshold};
            return entry->handler(inv);
        }
        ScenarioDatabase working = db;
        ToolInvocation inv{working, &working, call.parameters, options.token_threshold};
        auto result = entry->handler(inv);
        if (result.status == ToolStatus::Error) return result;
        validate_database(working);
        db = std::move(working);
        return result;
    } catch (const IntegrityError &e) {
        return ToolResult::error(e.what());
    } catch (const Json::exception &e) {
        spdlog::debug("tool '{}' rejected parameters: {}", schema.tool_name, e.what());
        return ToolResult::error("Invalid parameters for " + schema.tool_name + ".");
    }
}

} // namespace egoharness
