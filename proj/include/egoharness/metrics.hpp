#pragma once

#include <map>
#include <utility>

#include "egoharness/orchestrator.hpp"

namespace egoharness {

inline constexpr double kNumberTolerance = 1e-6;

/// Equality of a ground-truth parameter value and an agent value: strings
/// normalized, numbers within a relative tolerance, objects compared on the
/// ground-truth keys, arrays as multisets when the property schema says so.
bool values_match(const Json &expected, const Json &actual, const Json &property_schema = nullptr);

/// Same tool (normalized) and every ground-truth parameter matched.
bool calls_match(const ToolCall &expected, const ToolCall &actual, const ToolRegistry *registry = nullptr);

struct MatchReport {
    std::vector<std::pair<std::size_t, std::size_t>> matched_pairs; // (gt index, agent index)
    std::size_t matched = 0;
    std::size_t ground_truth = 0;

    std::size_t deficit() const { return ground_truth - matched; }
    bool contained() const { return matched == ground_truth; }
};

/// Maximum injective matching of ground-truth calls onto agent calls.
MatchReport match_tool_calls(const std::vector<ToolCall> &gt, const std::vector<ToolCall> &agent,
                             const ToolRegistry *registry = nullptr);

struct TaskEvaluation {
    const GroundTruth *ground_truth = nullptr;
    const Trajectory *trajectory = nullptr;
    std::string gt_replay_digest;
    const ToolRegistry *registry = nullptr;
};

struct TaskOutcome {
    std::string task_id;
    MatchReport match;
    bool tool_succ = false;
    bool result_succ = false;
    bool joint_succ = false;
};

struct MetricsReport {
    std::vector<TaskOutcome> tasks;
    std::size_t total_matched = 0;
    std::size_t total_ground_truth = 0;
    double tool_succ = 0;
    double micro_acc = 0;
    double result_succ = 0;
    double joint_succ = 0;

    Json to_json() const;
};

/// Throws EmptyDataset.
MetricsReport compute_metrics(const std::vector<TaskEvaluation> &tasks);

enum class ErrorLabel { Structural, Perception, Hallucination, Logical, OverOperation, Correct };

std::string_view to_string(ErrorLabel label);

struct Classification {
    ErrorLabel label = ErrorLabel::Correct;
    std::string evidence;
};

/// First firing predicate of the cascade c1..c5, else CORRECT.
Classification classify_error(const GroundTruth &gt, const Trajectory &traj, bool result_correct,
                              const ToolRegistry *registry = nullptr);

/// Runs the ground-truth calls on a copy of `pristine` and digests the final
/// state. Throws GroundTruthInvalid on any error result.
StateDigest replay_ground_truth(const GroundTruth &gt, const ScenarioDatabase &pristine,
                                const ToolRegistry &registry);

} // namespace egoharness
