#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "egoharness/tool_types.hpp"

namespace egoharness {

/// What a handler sees for one call. `db` is writable only for WRITE tools;
/// the engine hands READ and CALC handlers a null pointer.
struct ToolInvocation {
    const ScenarioDatabase &view;
    ScenarioDatabase *db;
    const Json &params;
    double token_threshold;
};

using ToolHandler = std::function<ToolResult(const ToolInvocation &)>;

struct ToolEntry {
    ToolSchema schema;
    ToolHandler handler; // may be empty for schema-only registries
};

/// Immutable set of tools for one scenario. Lookup ignores case.
class ToolRegistry {
  public:
    ToolRegistry() = default;
    ToolRegistry(std::string name, std::vector<ToolEntry> entries);

    const std::string &name() const { return name_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const ToolEntry *find(std::string_view tool_name) const;
    const ToolSchema *schema(std::string_view tool_name) const;
    std::vector<const ToolSchema *> schemas() const;

    /// Function-schema documents in registration order.
    Json documents() const;

  private:
    std::string name_;
    std::vector<ToolEntry> entries_;
};

/// Schema-only registry. Throws DuplicateTool, PreconditionError when empty.
ToolRegistry register_toolset(std::vector<ToolSchema> schemas, std::string name = "custom");

/// Rebuilds a schema-only registry from exported documents.
ToolRegistry registry_from_documents(const Json &documents, std::string name);

} // namespace egoharness
