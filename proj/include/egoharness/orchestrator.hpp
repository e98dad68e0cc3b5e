#pragma once

#include "egoharness/agent_adapter.hpp"
#include "egoharness/tool_engine.hpp"
#include "egoharness/user_simulator.hpp"

namespace egoharness {

enum class HaltReason { UserStop, TurnLimit, ToolLimit, AgentError, UserTerminated };

std::string_view to_string(HaltReason reason);
HaltReason halt_reason_from_string(std::string_view s);

struct EpisodeConfig {
    InteractionMode mode = InteractionMode::DynamicEasy;
    int max_user_turns = 10;
    int max_tool_calls = 200;
    int max_inner_iterations = 25;
    /// Hard mode ends the episode after this many consecutive complaints; 0 = never.
    int complaint_termination = 0;
    ExecuteOptions execute;

    void validate() const; // throws ConfigError
};

inline constexpr std::string_view kAgentGreeting = "Dear customer, how can I help you?";

struct BudgetCounters {
    int user_turns = 0;
    int tool_calls = 0;
};

struct BudgetVerdict {
    bool halt = false;
    HaltReason reason = HaltReason::UserStop;
    std::size_t executable = 0; // calls of the pending batch that may still run
};

/// With no pending calls, checks the user-turn budget; otherwise admits as
/// much of the pending batch as fits under the tool-call cap.
BudgetVerdict enforce_budgets(const BudgetCounters &counters, const EpisodeConfig &config, std::size_t pending_calls);

enum class AgentMessageKind { ToolBatch, NaturalReply };

struct ParsedAgentMessage {
    AgentMessageKind kind = AgentMessageKind::NaturalReply;
    std::vector<ToolCall> calls;
    std::string text;
    bool format_violation = false;
    std::string violation;
    Json emitted = Json::array(); // call-shaped elements as the agent wrote them
};

ParsedAgentMessage parse_agent_message(std::string_view text);

struct DialogueEntry {
    std::string role; // "user" or "assistant"
    int turn = 0;
    std::string content;
    Json evaluation; // null for agent turns
};

struct ToolBatchRecord {
    int turn = 0;
    std::vector<ToolCall> calls;
    std::vector<std::string> results;
};

struct Trajectory {
    std::string task_id;
    std::string scenario_id;
    InteractionMode mode = InteractionMode::DynamicEasy;
    std::string model;
    std::vector<DialogueEntry> dialogue;
    std::vector<ToolBatchRecord> tool_batches;
    std::vector<ToolCall> tool_calls_flat;
    Json emitted_calls = Json::array();
    std::vector<std::string> format_violations;
    int rounds_count = 0;
    int user_turns = 0;
    UsageCounters usage;
    HaltReason halted_reason = HaltReason::UserStop;
    std::string error;
    std::string final_reply;
    StateDigest final_digest;

    /// Trajectory log document. Ground-truth fields are added by the harness.
    Json to_log(const TaskSpec &task) const;
    static Trajectory from_log(const Json &log);
};

/// Message sent to the agent in place of the user when tools ran.
std::string format_tool_results(const std::vector<std::string> &results);

/// Runs one episode against `db`, which must be the pristine state.
Trajectory run_episode(const TaskSpec &task, AgentAdapter &agent, UserSimulator &user, ScenarioDatabase &db,
                       const ToolRegistry &registry, const EpisodeConfig &config, const PromptSet &prompts);

} // namespace egoharness
