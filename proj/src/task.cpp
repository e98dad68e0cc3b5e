#include "egoharness/task.hpp"

#include <fstream>
#include <regex>

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/toolsets.hpp"

namespace egoharness {

Json GroundTruth::to_json() const {
    Json calls = Json::array();
    for (const auto &c : tool_calls) calls.push_back(c.to_json());
    Json anchors = Json::array();
    for (const auto &a : perception_anchors) anchors.push_back({{"key", a.key}, {"values", a.values}});
    return Json{{"tool_calls", calls}, {"perception_anchors", anchors}, {"user_id", user_id}};
}

GroundTruth GroundTruth::from_json(const Json &j, const std::string &task_id) {
    GroundTruth gt;
    gt.task_id = task_id;
    gt.user_id = j.value("user_id", "");
    for (const auto &c : j.value("tool_calls", Json::array())) {
        auto shape = validate_call_shape(c);
        if (auto *err = std::get_if<ShapeError>(&shape))
            throw TaskError(task_id + ": ground-truth call malformed: " + err->detail);
        gt.tool_calls.push_back(std::get<ToolCall>(shape));
    }
    for (const auto &a : j.value("perception_anchors", Json::array()))
        gt.perception_anchors.push_back(
            PerceptionAnchor{a.at("key").get<std::string>(), a.at("values").get<std::vector<std::string>>()});
    return gt;
}

Json TaskSpec::to_json() const {
    Json j{{"task_id", task_id},
           {"scenario_id", scenario_id},
           {"instruction", instruction},
           {"image_description", image_description},
           {"ground_truth", ground_truth.to_json()}};
    j["media"] = media ? media->to_json() : Json();
    return j;
}

TaskSpec TaskSpec::from_json(const Json &j) {
    try {
        TaskSpec t;
        t.task_id = j.at("task_id").get<std::string>();
        t.scenario_id = j.at("scenario_id").get<std::string>();
        t.instruction = j.at("instruction").get<std::string>();
        t.image_description = j.value("image_description", "");
        if (j.contains("media") && !j.at("media").is_null()) t.media = MediaRef::from_json(j.at("media"));
        t.ground_truth = GroundTruth::from_json(j.value("ground_truth", Json::object()), t.task_id);
        return t;
    } catch (const Json::exception &e) {
        throw TaskError(std::string("malformed task: ") + e.what());
    }
}

std::optional<std::string> extract_user_id(std::string_view instruction) {
    static const std::regex pattern(R"(user[ _]?id(?:\s*:\s*|\s+is\s+)([A-Za-z0-9_\-]+))", std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(instruction.begin(), instruction.end(), m, pattern)) return m[1].str();
    return std::nullopt;
}

std::vector<TaskSpec> parse_tasks(const Json &doc) {
    if (!doc.is_object() || !doc.contains("tasks") || !doc.at("tasks").is_array())
        throw TaskError("task document must be {\"tasks\": [...]}");
    std::vector<TaskSpec> out;
    for (const auto &j : doc.at("tasks")) {
        auto t = TaskSpec::from_json(j);
        auto uid = extract_user_id(t.instruction);
        if (!uid) throw TaskError(t.task_id + ": instruction lacks a 'User ID:' mention");
        if (t.ground_truth.user_id.empty()) t.ground_truth.user_id = *uid;
        if (*uid != t.ground_truth.user_id)
            throw TaskError(t.task_id + ": instruction user id '" + *uid + "' differs from ground truth '" +
                            t.ground_truth.user_id + "'");
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

Json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace

std::vector<TaskSpec> load_tasks(const std::filesystem::path &path) { return parse_tasks(read_json(path)); }

ScenarioPack ScenarioPack::load(const std::filesystem::path &manifest) {
    auto doc = read_json(manifest);
    auto base = manifest.parent_path();
    ScenarioPack pack;
    try {
        for (const auto &entry : doc.at("scenarios")) {
            Scenario s;
            s.scenario_id = entry.at("scenario_id").get<std::string>();
            s.kind = entry.at("kind").get<std::string>();
            s.pristine = load_database(base / entry.at("database").get<std::string>(), &s.report, s.scenario_id);
            s.registry = toolset_for(s.kind);
            for (const auto &d : s.report.dangling) spdlog::warn("{}: dangling reference {}", s.scenario_id, d);
            auto id = s.scenario_id;
            if (!pack.scenarios_.emplace(id, std::move(s)).second)
                throw ConfigError("duplicate scenario id '" + id + "'");
        }
        for (const auto &t : doc.value("tasks", Json::array())) pack.task_files_.push_back(base / t.get<std::string>());
    } catch (const Json::exception &e) {
        throw ConfigError(manifest.string() + ": " + e.what());
    }
    return pack;
}

const Scenario &ScenarioPack::at(const std::string &scenario_id) const {
    auto it = scenarios_.find(scenario_id);
    if (it == scenarios_.end()) throw TaskError("unknown scenario '" + scenario_id + "'");
    return it->second;
}

} // namespace egoharness
