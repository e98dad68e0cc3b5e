#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace egoharness {

using Json = nlohmann::json;

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);

enum class MediaKind { Video, Image };

/// Opaque pointer to first-person footage; never decoded here.
struct MediaRef {
    std::string uri;
    MediaKind kind = MediaKind::Video;
    std::optional<double> duration_s;

    Json to_json() const;
    static MediaRef from_json(const Json &j);
    bool operator==(const MediaRef &) const = default;
};

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::vector<MediaRef> media;
};

struct UsageCounters {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    UsageCounters &operator+=(const UsageCounters &o) {
        input_tokens += o.input_tokens;
        output_tokens += o.output_tokens;
        return *this;
    }
};

struct ChatReply {
    std::string text;
    UsageCounters usage;
};

/// A completion endpoint. One instance serves one episode; factories hand
/// out fresh instances so concurrent episodes never share session state.
class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) = 0;
    virtual std::string model() const = 0;
    virtual bool supports_media() const { return false; }
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff{500}; // doubled after every failure
};

/// Runs `attempt`, retrying TransportError with exponential backoff.
ChatReply with_retries(const RetryPolicy &policy, const std::function<ChatReply()> &attempt);

} // namespace egoharness
