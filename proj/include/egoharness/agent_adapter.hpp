#pragma once

#include <optional>

#include "egoharness/chat.hpp"

namespace egoharness {

struct AdapterConfig {
    /// Character budget for the history sent to the backend; unset = unlimited.
    std::optional<std::size_t> context_budget_chars;
    /// Text sent in place of media for backends that cannot take media.
    std::string image_description;
};

/// Presents the episode's history to the agent under test.
class AgentAdapter {
  public:
    AgentAdapter(ChatBackend &backend, Json tool_documents, AdapterConfig config = {});

    /// Throws PreconditionError unless the history starts with the system prompt.
    ChatReply send(const std::vector<ChatMessage> &history);

    std::string model() const { return backend_.model(); }
    const UsageCounters &usage() const { return usage_; }
    std::size_t truncated_payloads() const { return truncated_; }
    bool degraded_media() const { return degraded_; }

  private:
    ChatBackend &backend_;
    Json tools_;
    AdapterConfig config_;
    UsageCounters usage_;
    std::size_t truncated_ = 0;
    bool degraded_ = false;
};

/// Replaces the oldest tool payloads with a marker until the history fits.
/// Returns the number of payloads dropped.
std::size_t truncate_history(std::vector<ChatMessage> &history, std::size_t budget_chars);

inline constexpr std::string_view kTruncatedMarker = "[tool result omitted to fit the context budget]";

} // namespace egoharness
