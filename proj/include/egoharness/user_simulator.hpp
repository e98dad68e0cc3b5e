#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "egoharness/chat.hpp"
#include "egoharness/prompts.hpp"
#include "egoharness/task.hpp"

namespace egoharness {

enum class InteractionMode { DynamicEasy, DynamicHard, Static };

std::string_view to_string(InteractionMode mode); // "easy", "hard", "static"
InteractionMode mode_from_string(std::string_view s);

struct CriteriaScores {
    int role_consistency = 1;
    int instruction_following = 1;
    int resilience = 1;
    int contextual_robustness = 1;
    std::string suggestion;

    bool all_pass() const;
    double average() const;
    Json scores_json() const;

    /// Parses the evaluator's strict JSON (a surrounding code fence is
    /// tolerated). Throws MalformedEvaluation.
    static CriteriaScores parse(std::string_view text);
};

struct UserSessionState {
    std::string summary;
    std::optional<std::string> feedback;
    std::optional<std::string> original_response;
    InteractionMode mode = InteractionMode::DynamicEasy;
};

struct UserBackends {
    ChatBackend &actor;
    ChatBackend &evaluator;
    ChatBackend &summarizer;
};

/// Outcome of one gated user turn.
struct GatedTurn {
    std::string text;
    CriteriaScores scores; // of the forwarded response
    bool correction_applied = false;
    std::string original_response; // first draft when a correction ran
    std::string first_suggestion;
    int actor_calls = 0;
    int evaluator_calls = 0;

    /// {"scores", "suggestion", "average_score", "original_response", "correction_applied"}.
    Json evaluation_json() const;
};

/// Sentences per scenario kind used to distract the agent in hard mode.
using NoisePools = std::map<std::string, std::vector<std::string>>;
NoisePools load_noise_pools(const std::filesystem::path &path = default_asset_dir() / "noise_pools.json");

/// Appends one sentence from `pool` to `base`.
std::string hard_mode_noise(const std::string &base, const std::vector<std::string> &pool, std::mt19937_64 &rng);

/// Per-episode seed derived from the run seed and the task id.
std::uint64_t episode_seed(std::uint64_t run_seed, std::string_view task_id);

/// True for a bare STOP or a message carrying STOP as a standalone token.
bool is_stop(std::string_view message);
bool is_complaint(std::string_view message);

/// Actor, Evaluator and Summarizer for one episode.
class UserSimulator {
  public:
    UserSimulator(const TaskSpec &task, InteractionMode mode, const PromptSet &prompts, UserBackends backends,
                  std::vector<std::string> noise_pool = {}, std::uint64_t seed = 0);

    std::string actor_prompt(const std::string &agent_reply) const;
    std::string actor_respond(const std::string &agent_reply);
    CriteriaScores evaluate_response(const std::string &user_message, const std::string &agent_message);
    GatedTurn gate_user_turn(const std::string &agent_reply);
    std::string summarize_turn(const std::string &agent_reply, const std::string &user_message);

    const UserSessionState &state() const { return state_; }
    std::size_t actor_invocations() const { return actor_calls_; }
    std::size_t evaluator_invocations() const { return evaluator_calls_; }

  private:
    const TaskSpec &task_;
    const PromptSet &prompts_;
    UserBackends backends_;
    std::vector<std::string> noise_pool_;
    std::mt19937_64 rng_;
    UserSessionState state_;
    std::size_t actor_calls_ = 0;
    std::size_t evaluator_calls_ = 0;
};

} // namespace egoharness
