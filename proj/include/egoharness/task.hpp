#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egoharness/chat.hpp"
#include "egoharness/tool_registry.hpp"

namespace egoharness {

/// Attribute key plus values the agent must look up (e.g. product_name).
struct PerceptionAnchor {
    std::string key;
    std::vector<std::string> values;
};

struct GroundTruth {
    std::string task_id;
    std::vector<ToolCall> tool_calls;
    std::vector<PerceptionAnchor> perception_anchors;
    std::string user_id;

    Json to_json() const;
    static GroundTruth from_json(const Json &j, const std::string &task_id);
};

struct TaskSpec {
    std::string task_id;
    std::string scenario_id;
    std::string instruction;
    std::string image_description;
    std::optional<MediaRef> media;
    GroundTruth ground_truth;

    Json to_json() const;
    static TaskSpec from_json(const Json &j);
};

/// Finds "User ID: X" or "user ID is X" (case-insensitive) in the brief.
std::optional<std::string> extract_user_id(std::string_view instruction);

/// Parses {"tasks": [...]} and checks each user id. Throws TaskError.
std::vector<TaskSpec> parse_tasks(const Json &doc);
std::vector<TaskSpec> load_tasks(const std::filesystem::path &path);

struct Scenario {
    std::string scenario_id;
    std::string kind;
    ScenarioDatabase pristine;
    ToolRegistry registry;
    LoadReport report;
};

/// Scenarios listed in a pack manifest:
/// {"scenarios": [{"scenario_id", "kind", "database"}], "tasks": [...]}.
class ScenarioPack {
  public:
    static ScenarioPack load(const std::filesystem::path &manifest);

    const Scenario &at(const std::string &scenario_id) const;
    bool contains(const std::string &scenario_id) const { return scenarios_.contains(scenario_id); }
    const std::map<std::string, Scenario> &scenarios() const { return scenarios_; }
    /// Task files named by the manifest, resolved against its directory.
    const std::vector<std::filesystem::path> &task_files() const { return task_files_; }

  private:
    std::map<std::string, Scenario> scenarios_;
    std::vector<std::filesystem::path> task_files_;
};

} // namespace egoharness
