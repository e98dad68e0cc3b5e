#include "egoharness/tool_types.hpp"

#include <algorithm>

#include "egoharness/errors.hpp"

namespace egoharness {

std::string_view to_string(ToolKind kind) {
    switch (kind) {
    case ToolKind::Read: return "READ";
    case ToolKind::Write: return "WRITE";
    case ToolKind::Calc: return "CALC";
    }
    return "?";
}

ToolKind tool_kind_from_string(std::string_view s) {
    if (s == "READ") return ToolKind::Read;
    if (s == "WRITE") return ToolKind::Write;
    if (s == "CALC") return ToolKind::Calc;
    throw SchemaError("unknown tool kind '" + std::string(s) + "'");
}

std::string_view to_string(ToolStatus status) {
    switch (status) {
    case ToolStatus::Success: return "success";
    case ToolStatus::PartialSuccess: return "partial_success";
    case ToolStatus::Error: return "error";
    }
    return "?";
}

std::string_view to_string(ShapeErrorKind kind) {
    switch (kind) {
    case ShapeErrorKind::NoCall: return "NO_CALL";
    case ShapeErrorKind::NotARecord: return "NOT_A_RECORD";
    case ShapeErrorKind::MissingFields: return "MISSING_FIELDS";
    }
    return "?";
}

const ParamSpec *ToolSchema::param(std::string_view name) const {
    for (const auto &p : params)
        if (p.name == name) return &p;
    return nullptr;
}

Json ToolSchema::to_document() const {
    Json props = Json::object();
    Json required = Json::array();
    for (const auto &p : params) {
        Json prop{{"type", p.type}};
        if (!p.description.empty()) prop["description"] = p.description;
        if (p.minimum) prop["minimum"] = *p.minimum;
        if (p.exclusive_minimum) prop["exclusiveMinimum"] = *p.exclusive_minimum;
        if (p.maximum) prop["maximum"] = *p.maximum;
        if (p.unordered) prop["x-unordered"] = true;
        if (!p.items.is_null()) prop["items"] = p.items;
        props[p.name] = std::move(prop);
        if (p.required) required.push_back(p.name);
    }
    return Json{{"type", "function"},
                {"function",
                 {{"tool_name", tool_name},
                  {"description", description},
                  {"kind", to_string(kind)},
                  {"parameters",
                   {{"type", "object"},
                    {"additionalProperties", additional_properties},
                    {"properties", props},
                    {"required", required}}}}}};
}

ToolSchema ToolSchema::from_document(const Json &doc) {
    try {
        const auto &fn = doc.at("function");
        ToolSchema s;
        s.tool_name = fn.at("tool_name").get<std::string>();
        s.description = fn.value("description", "");
        s.kind = tool_kind_from_string(fn.value("kind", "READ"));
        const auto &params = fn.at("parameters");
        s.additional_properties = params.value("additionalProperties", false);
        std::vector<std::string> required;
        if (params.contains("required")) required = params.at("required").get<std::vector<std::string>>();
        const Json props = params.value("properties", Json::object());
        for (const auto &[name, prop] : props.items()) {
            ParamSpec p;
            p.name = name;
            p.type = prop.value("type", "string");
            p.description = prop.value("description", "");
            if (prop.contains("minimum")) p.minimum = prop.at("minimum").get<double>();
            if (prop.contains("exclusiveMinimum")) p.exclusive_minimum = prop.at("exclusiveMinimum").get<double>();
            if (prop.contains("maximum")) p.maximum = prop.at("maximum").get<double>();
            p.unordered = prop.value("x-unordered", false);
            if (prop.contains("items")) p.items = prop.at("items");
            p.required = std::find(required.begin(), required.end(), name) != required.end();
            s.params.push_back(std::move(p));
        }
        auto rank = [&](const ParamSpec &p) {
            auto it = std::find(required.begin(), required.end(), p.name);
            return it == required.end() ? required.size() : static_cast<std::size_t>(it - required.begin());
        };
        std::stable_sort(s.params.begin(), s.params.end(),
                         [&](const ParamSpec &a, const ParamSpec &b) { return rank(a) < rank(b); });
        return s;
    } catch (const Json::exception &e) {
        throw SchemaError(std::string("tool schema document: ") + e.what());
    }
}

ToolResult ToolResult::success(Json payload, std::string message) {
    return ToolResult{ToolStatus::Success, std::move(message), std::move(payload)};
}

ToolResult ToolResult::error(std::string message) {
    Json payload{{"status", "error"}, {"message", message}};
    return ToolResult{ToolStatus::Error, std::move(message), std::move(payload)};
}

std::string ToolResult::serialize() const { return spaced_dump(payload); }

ShapeCheck validate_call_shape(const Json &raw) {
    if (raw.is_null()) return ShapeError{ShapeErrorKind::NoCall, "no tool call emitted"};
    if (!raw.is_object()) return ShapeError{ShapeErrorKind::NotARecord, "call is not a record: " + raw.dump()};
    auto name = raw.find("tool_name");
    if (name == raw.end() || !name->is_string() || name->get<std::string>().empty())
        return ShapeError{ShapeErrorKind::MissingFields, "missing or non-string 'tool_name'"};
    auto params = raw.find("parameters");
    if (params == raw.end()) return ShapeError{ShapeErrorKind::MissingFields, "missing 'parameters'"};
    if (!params->is_object()) return ShapeError{ShapeErrorKind::MissingFields, "'parameters' is not a map"};
    return ToolCall{name->get<std::string>(), *params};
}

namespace {

void dump_spaced(const Json &v, std::string &out) {
    if (v.is_object()) {
        out.push_back('{');
        bool first = true;
        for (const auto &[key, value] : v.items()) {
            if (!first) out += ", ";
            first = false;
            out += Json(key).dump();
            out += ": ";
            dump_spaced(value, out);
        }
        out.push_back('}');
    } else if (v.is_array()) {
        out.push_back('[');
        bool first = true;
        for (const auto &value : v) {
            if (!first) out += ", ";
            first = false;
            dump_spaced(value, out);
        }
        out.push_back(']');
    } else {
        out += v.dump(-1, ' ', false, Json::error_handler_t::replace);
    }
}

} // namespace

std::string spaced_dump(const Json &value) {
    std::string out;
    dump_spaced(value, out);
    return out;
}

} // namespace egoharness
