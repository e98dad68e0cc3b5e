#include "egoharness/agent_adapter.hpp"

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"

namespace egoharness {

AgentAdapter::AgentAdapter(ChatBackend &backend, Json tool_documents, AdapterConfig config)
    : backend_(backend), tools_(std::move(tool_documents)), config_(std::move(config)) {}

std::size_t truncate_history(std::vector<ChatMessage> &history, std::size_t budget_chars) {
    auto total = [&] {
        std::size_t n = 0;
        for (const auto &m : history) n += m.content.size();
        return n;
    };
    std::size_t dropped = 0;
    for (auto &m : history) {
        if (total() <= budget_chars) break;
        if (m.role != Role::Tool || m.content == kTruncatedMarker) continue;
        m.content = std::string(kTruncatedMarker);
        ++dropped;
    }
    return dropped;
}

ChatReply AgentAdapter::send(const std::vector<ChatMessage> &history) {
    if (history.empty()) throw PreconditionError("agent history is empty");
    if (history.front().role != Role::System) throw PreconditionError("agent history must start with the system prompt");

    std::vector<ChatMessage> outgoing = history;
    if (!backend_.supports_media()) {
        for (auto &m : outgoing) {
            if (m.media.empty()) continue;
            m.media.clear();
            if (!config_.image_description.empty())
                m.content += "\n\n[Scene description] " + config_.image_description;
            if (!degraded_) spdlog::info("backend '{}' takes no media; sending the scene description", backend_.model());
            degraded_ = true;
        }
    }
    if (config_.context_budget_chars) {
        auto dropped = truncate_history(outgoing, *config_.context_budget_chars);
        if (dropped > 0) {
            spdlog::info("dropped {} tool payload(s) to fit the context budget", dropped);
            truncated_ += dropped;
        }
    }
    auto reply = backend_.complete(outgoing, tools_);
    usage_ += reply.usage;
    return reply;
}

} // namespace egoharness
