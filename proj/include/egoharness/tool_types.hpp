#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "egoharness/scenario_store.hpp"

namespace egoharness {

enum class ToolKind { Read, Write, Calc };

std::string_view to_string(ToolKind kind);
ToolKind tool_kind_from_string(std::string_view s);

struct ParamSpec {
    std::string name;
    std::string type; // JSON-Schema primitive: string, number, integer, boolean, array, object
    bool required = true;
    std::string description;
    std::optional<double> minimum;
    std::optional<double> exclusive_minimum;
    std::optional<double> maximum;
    bool unordered = false; // list compared as a multiset when matching calls
    Json items;             // element schema for arrays
};

struct ToolSchema {
    std::string tool_name;
    std::string description;
    ToolKind kind = ToolKind::Read;
    std::vector<ParamSpec> params;
    bool additional_properties = false;

    const ParamSpec *param(std::string_view name) const;

    /// Function-schema document: {"type":"function","function":{...}}.
    Json to_document() const;
    static ToolSchema from_document(const Json &doc);
};

struct ToolCall {
    std::string tool_name;
    Json parameters = Json::object();

    Json to_json() const { return Json{{"tool_name", tool_name}, {"parameters", parameters}}; }
    bool operator==(const ToolCall &) const = default;
};

enum class ToolStatus { Success, PartialSuccess, Error };

std::string_view to_string(ToolStatus status);

struct ToolResult {
    ToolStatus status = ToolStatus::Success;
    std::string message;
    Json payload = Json::object(); // exactly what the agent sees

    static ToolResult success(Json payload, std::string message = {});
    static ToolResult error(std::string message);

    /// Payload rendered with ", " and ": " separators, as in trajectory logs.
    std::string serialize() const;
};

enum class ShapeErrorKind { NoCall, NotARecord, MissingFields };

std::string_view to_string(ShapeErrorKind kind);

struct ShapeError {
    ShapeErrorKind kind;
    std::string detail;
};

using ShapeCheck = std::variant<ToolCall, ShapeError>;

/// Accepts only objects with a string tool_name and an object parameters.
ShapeCheck validate_call_shape(const Json &raw);

/// JSON text with Python-style separators (", " / ": ").
std::string spaced_dump(const Json &value);

} // namespace egoharness
