#include "egoharness/metrics.hpp"

#include <cmath>
#include <functional>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

namespace {

/// Kuhn's augmenting-path bipartite matching. Returns, for each left
/// vertex, the matched right vertex or -1.
std::vector<int> max_matching(std::size_t left, std::size_t right,
                              const std::function<bool(std::size_t, std::size_t)> &edge) {
    std::vector<std::vector<std::size_t>> adj(left);
    for (std::size_t i = 0; i < left; ++i)
        for (std::size_t j = 0; j < right; ++j)
            if (edge(i, j)) adj[i].push_back(j);

    std::vector<int> owner(right, -1);
    std::vector<char> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t i) {
        for (auto j : adj[i]) {
            if (seen[j]) continue;
            seen[j] = 1;
            if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]))) {
                owner[j] = static_cast<int>(i);
                return true;
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < left; ++i) {
        seen.assign(right, 0);
        augment(i);
    }
    std::vector<int> mate(left, -1);
    for (std::size_t j = 0; j < right; ++j)
        if (owner[j] >= 0) mate[static_cast<std::size_t>(owner[j])] = static_cast<int>(j);
    return mate;
}

Json property_of(const ParamSpec &p) {
    Json prop{{"type", p.type}};
    if (!p.items.is_null()) prop["items"] = p.items;
    if (p.unordered) prop["x-unordered"] = true;
    return prop;
}

bool numbers_close(double a, double b) {
    if (a == b) return true;
    return std::fabs(a - b) <= kNumberTolerance * std::max(std::fabs(a), std::fabs(b));
}

} // namespace

bool values_match(const Json &expected, const Json &actual, const Json &schema) {
    if (expected.is_string())
        return actual.is_string() &&
               normalize_name(expected.get_ref<const std::string &>()) ==
                   normalize_name(actual.get_ref<const std::string &>());
    if (expected.is_number())
        return actual.is_number() && numbers_close(expected.get<double>(), actual.get<double>());
    if (expected.is_boolean()) return actual.is_boolean() && expected == actual;
    if (expected.is_null()) return actual.is_null();
    if (expected.is_object()) {
        if (!actual.is_object()) return false;
        const Json *props = schema.is_object() && schema.contains("properties") ? &schema["properties"] : nullptr;
        for (const auto &[key, value] : expected.items()) {
            if (!actual.contains(key)) return false;
            Json sub = props && props->contains(key) ? (*props)[key] : Json();
            if (!values_match(value, actual[key], sub)) return false;
        }
        return true;
    }
    if (!actual.is_array() || actual.size() != expected.size()) return false;
    Json items = schema.is_object() ? schema.value("items", Json()) : Json();
    if (schema.is_object() && schema.value("x-unordered", false)) {
        auto mate = max_matching(expected.size(), actual.size(),
                                 [&](std::size_t i, std::size_t j) { return values_match(expected[i], actual[j], items); });
        return std::all_of(mate.begin(), mate.end(), [](int m) { return m >= 0; });
    }
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (!values_match(expected[i], actual[i], items)) return false;
    return true;
}

bool calls_match(const ToolCall &expected, const ToolCall &actual, const ToolRegistry *registry) {
    if (normalize_name(expected.tool_name) != normalize_name(actual.tool_name)) return false;
    if (!actual.parameters.is_object()) return expected.parameters.empty();
    const ToolSchema *schema = registry ? registry->schema(expected.tool_name) : nullptr;
    for (const auto &[key, value] : expected.parameters.items()) {
        if (!actual.parameters.contains(key)) return false;
        const ParamSpec *spec = schema ? schema->param(key) : nullptr;
        if (!values_match(value, actual.parameters[key], spec ? property_of(*spec) : Json())) return false;
    }
    return true;
}

MatchReport match_tool_calls(const std::vector<ToolCall> &gt, const std::vector<ToolCall> &agent,
                             const ToolRegistry *registry) {
    auto mate = max_matching(gt.size(), agent.size(),
                             [&](std::size_t i, std::size_t j) { return calls_match(gt[i], agent[j], registry); });
    MatchReport report;
    report.ground_truth = gt.size();
    for (std::size_t i = 0; i < mate.size(); ++i)
        if (mate[i] >= 0) report.matched_pairs.emplace_back(i, static_cast<std::size_t>(mate[i]));
    report.matched = report.matched_pairs.size();
    return report;
}

Json MetricsReport::to_json() const {
    Json rows = Json::array();
    for (const auto &t : tasks)
        rows.push_back({{"task_id", t.task_id},
                        {"matched", t.match.matched},
                        {"ground_truth", t.match.ground_truth},
                        {"deficit", t.match.deficit()},
                        {"tool_succ", t.tool_succ},
                        {"result_succ", t.result_succ},
                        {"joint_succ", t.joint_succ}});
    return Json{{"tasks", rows},
                {"task_count", tasks.size()},
                {"total_matched", total_matched},
                {"total_ground_truth", total_ground_truth},
                {"ToolSucc", tool_succ},
                {"MicroAcc", micro_acc},
                {"ResultSucc", result_succ},
                {"JointSucc", joint_succ}};
}

MetricsReport compute_metrics(const std::vector<TaskEvaluation> &tasks) {
    if (tasks.empty()) throw EmptyDataset();
    MetricsReport report;
    std::size_t tool = 0, result = 0, joint = 0;
    for (const auto &t : tasks) {
        if (!t.ground_truth || !t.trajectory) throw PreconditionError("task evaluation without ground truth or trajectory");
        TaskOutcome o;
        o.task_id = t.trajectory->task_id;
        o.match = match_tool_calls(t.ground_truth->tool_calls, t.trajectory->tool_calls_flat, t.registry);
        o.tool_succ = o.match.contained();
        o.result_succ = !t.gt_replay_digest.empty() && t.trajectory->final_digest.digest == t.gt_replay_digest;
        o.joint_succ = o.tool_succ && o.result_succ;
        report.total_matched += o.match.matched;
        report.total_ground_truth += o.match.ground_truth;
        tool += o.tool_succ;
        result += o.result_succ;
        joint += o.joint_succ;
        report.tasks.push_back(std::move(o));
    }
    double n = static_cast<double>(tasks.size());
    report.tool_succ = tool / n;
    report.result_succ = result / n;
    report.joint_succ = joint / n;
    report.micro_acc = report.total_ground_truth == 0
                           ? 1.0
                           : static_cast<double>(report.total_matched) / static_cast<double>(report.total_ground_truth);
    return report;
}

std::string_view to_string(ErrorLabel label) {
    switch (label) {
    case ErrorLabel::Structural: return "STRUCTURAL";
    case ErrorLabel::Perception: return "PERCEPTION";
    case ErrorLabel::Hallucination: return "HALLUCINATION";
    case ErrorLabel::Logical: return "LOGICAL";
    case ErrorLabel::OverOperation: return "OVER_OPERATION";
    case ErrorLabel::Correct: return "CORRECT";
    }
    return "?";
}

namespace {

bool is_query_tool(const std::string &tool_name, const ToolRegistry *registry) {
    if (registry) {
        if (const auto *s = registry->schema(tool_name)) return s->kind == ToolKind::Read;
        return false;
    }
    for (std::string_view prefix : {"get_", "find_", "list_", "filter_"})
        if (tool_name.rfind(prefix, 0) == 0) return true;
    return false;
}

bool anchor_queried(const std::string &key, const std::string &value, const Trajectory &traj,
                    const ToolRegistry *registry) {
    for (const auto &call : traj.tool_calls_flat) {
        if (!is_query_tool(call.tool_name, registry) || !call.parameters.is_object() || !call.parameters.contains(key))
            continue;
        const Json &p = call.parameters[key];
        if (p.is_string() && fuzzy_equal(p.get<std::string>(), value)) return true;
        if (p.is_array())
            for (const auto &e : p)
                if (e.is_string() && fuzzy_equal(e.get<std::string>(), value)) return true;
    }
    return false;
}

} // namespace

Classification classify_error(const GroundTruth &gt, const Trajectory &traj, bool result_correct,
                              const ToolRegistry *registry) {
    for (const auto &raw : traj.emitted_calls) {
        auto shape = validate_call_shape(raw);
        if (auto *err = std::get_if<ShapeError>(&shape))
            return {ErrorLabel::Structural, std::string(to_string(err->kind)) + ": " + err->detail};
    }
    auto match = match_tool_calls(gt.tool_calls, traj.tool_calls_flat, registry);
    if (!gt.tool_calls.empty() && traj.tool_calls_flat.empty()) {
        std::string why = "no tool call executed";
        if (!traj.format_violations.empty()) why += " (" + traj.format_violations.front() + ")";
        return {ErrorLabel::Structural, why};
    }
    if (traj.mode == InteractionMode::Static && match.deficit() >= 1 &&
        traj.final_reply.find('?') != std::string::npos)
        return {ErrorLabel::Structural, "static request answered with a question: " + traj.final_reply};

    for (const auto &anchor : gt.perception_anchors)
        for (const auto &v : anchor.values)
            if (!anchor_queried(anchor.key, v, traj, registry))
                return {ErrorLabel::Perception, "anchor " + anchor.key + "='" + v + "' never queried"};

    auto expected_uid = normalize_name(gt.user_id);
    for (const auto &call : traj.tool_calls_flat) {
        if (!call.parameters.is_object() || !call.parameters.contains("user_id")) continue;
        const Json &u = call.parameters["user_id"];
        if (!u.is_string() || normalize_name(u.get<std::string>()) != expected_uid)
            return {ErrorLabel::Hallucination, call.tool_name + " used user_id " + u.dump()};
    }
    if (match.deficit() >= 1)
        return {ErrorLabel::Logical, std::to_string(match.deficit()) + " ground-truth call(s) unmatched"};
    if (!result_correct) return {ErrorLabel::OverOperation, "all ground-truth calls matched but final state differs"};
    return {ErrorLabel::Correct, {}};
}

StateDigest replay_ground_truth(const GroundTruth &gt, const ScenarioDatabase &pristine,
                                const ToolRegistry &registry) {
    ScenarioDatabase db = pristine;
    for (std::size_t i = 0; i < gt.tool_calls.size(); ++i) {
        const auto &call = gt.tool_calls[i];
        if (!registry.find(call.tool_name))
            throw GroundTruthInvalid(gt.task_id + ": call " + std::to_string(i) + " names unknown tool '" +
                                     call.tool_name + "'");
        auto result = execute(db, call, registry);
        if (result.status == ToolStatus::Error)
            throw GroundTruthInvalid(gt.task_id + ": call " + std::to_string(i) + " (" + call.tool_name +
                                     ") failed: " + result.message);
    }
    return snapshot(db);
}

} // namespace egoharness
