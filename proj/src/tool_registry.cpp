#include "egoharness/tool_registry.hpp"

#include <set>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

ToolRegistry::ToolRegistry(std::string name, std::vector<ToolEntry> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
    if (entries_.empty()) throw PreconditionError("toolset '" + name_ + "' has no tools");
    std::set<std::string> seen;
    for (const auto &e : entries_) {
        if (e.schema.tool_name.empty()) throw SchemaError("tool with empty name in '" + name_ + "'");
        for (const auto &p : e.schema.params)
            if (p.type.empty()) throw SchemaError("parameter '" + p.name + "' of '" + e.schema.tool_name + "' lacks a type");
        if (!seen.insert(normalize_name(e.schema.tool_name)).second) throw DuplicateTool(e.schema.tool_name);
    }
}

const ToolEntry *ToolRegistry::find(std::string_view tool_name) const {
    auto key = normalize_name(tool_name);
    for (const auto &e : entries_)
        if (normalize_name(e.schema.tool_name) == key) return &e;
    return nullptr;
}

const ToolSchema *ToolRegistry::schema(std::string_view tool_name) const {
    const auto *e = find(tool_name);
    return e ? &e->schema : nullptr;
}

std::vector<const ToolSchema *> ToolRegistry::schemas() const {
    std::vector<const ToolSchema *> out;
    for (const auto &e : entries_) out.push_back(&e.schema);
    return out;
}

Json ToolRegistry::documents() const {
    Json docs = Json::array();
    for (const auto &e : entries_) docs.push_back(e.schema.to_document());
    return docs;
}

ToolRegistry register_toolset(std::vector<ToolSchema> schemas, std::string name) {
    std::vector<ToolEntry> entries;
    for (auto &s : schemas) entries.push_back(ToolEntry{std::move(s), {}});
    return ToolRegistry(std::move(name), std::move(entries));
}

ToolRegistry registry_from_documents(const Json &documents, std::string name) {
    if (!documents.is_array()) throw SchemaError("toolset document must be a list");
    std::vector<ToolSchema> schemas;
    for (const auto &d : documents) schemas.push_back(ToolSchema::from_document(d));
    return register_toolset(std::move(schemas), std::move(name));
}

} // namespace egoharness
