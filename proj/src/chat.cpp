#include "egoharness/chat.hpp"

#include <thread>

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"

namespace egoharness {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
    }
    return "?";
}

Json MediaRef::to_json() const {
    Json j{{"uri", uri}, {"kind", kind == MediaKind::Video ? "video" : "image"}};
    if (duration_s) j["duration_s"] = *duration_s;
    return j;
}

MediaRef MediaRef::from_json(const Json &j) {
    MediaRef m;
    m.uri = j.at("uri").get<std::string>();
    auto kind = j.value("kind", "video");
    if (kind == "video")
        m.kind = MediaKind::Video;
    else if (kind == "image")
        m.kind = MediaKind::Image;
    else
        throw SchemaError("unknown media kind '" + kind + "'");
    if (j.contains("duration_s") && !j.at("duration_s").is_null()) m.duration_s = j.at("duration_s").get<double>();
    return m;
}

ChatReply with_retries(const RetryPolicy &policy, const std::function<ChatReply()> &attempt) {
    auto delay = policy.backoff;
    for (int i = 0;; ++i) {
        try {
            return attempt();
        } catch (const TransportError &e) {
            if (i >= policy.max_retries) throw;
            spdlog::warn("{} (retry {}/{} in {} ms)", e.what(), i + 1, policy.max_retries, delay.count());
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

} // namespace egoharness
