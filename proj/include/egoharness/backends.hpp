#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

#include "egoharness/chat.hpp"
#include "egoharness/task.hpp"

namespace egoharness {

/// Replays a fixed list of replies; {user_id}, {instruction}, {task_id} and
/// {image_description} are filled from the variables map.
class ScriptedBackend : public ChatBackend {
  public:
    ScriptedBackend(std::vector<std::string> playbook, bool cycle = false,
                    std::map<std::string, std::string> vars = {}, std::string model = "scripted");

    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override;
    std::string model() const override { return model_; }

    std::size_t invocations() const { return calls_; }
    /// Messages passed to the most recent call.
    const std::vector<ChatMessage> &last_messages() const { return last_; }

  private:
    std::vector<std::string> playbook_;
    bool cycle_;
    std::map<std::string, std::string> vars_;
    std::string model_;
    std::size_t calls_ = 0;
    std::vector<ChatMessage> last_;
};

/// Returns the content of the last message.
class EchoBackend : public ChatBackend {
  public:
    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override;
    std::string model() const override { return "echo"; }
};

/// Never calls a tool; always answers with the same apology.
class NoopBackend : public ChatBackend {
  public:
    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override;
    std::string model() const override { return "noop"; }
};

/// Emits the given calls as tool batches in order, then converses.
class OracleAgent : public ChatBackend {
  public:
    explicit OracleAgent(std::vector<ToolCall> calls, std::size_t batch_size = 0);

    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override;
    std::string model() const override { return "oracle"; }

  private:
    std::vector<ToolCall> calls_;
    std::size_t batch_size_;
    std::size_t next_ = 0;
};

/// Adapts a callable; handy for adversarial agents in tests.
class FunctionBackend : public ChatBackend {
  public:
    using Fn = std::function<ChatReply(const std::vector<ChatMessage> &, const Json &)>;
    FunctionBackend(Fn fn, std::string model) : fn_(std::move(fn)), model_(std::move(model)) {}

    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override {
        return fn_(messages, tools);
    }
    std::string model() const override { return model_; }

  private:
    Fn fn_;
    std::string model_;
};

/// Field mapping for an OpenAI-style chat endpoint.
struct HttpProfile {
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env; // name of the variable holding the credential
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    double timeout_s = 60.0;
    RetryPolicy retry;
    std::string text_pointer = "/choices/0/message/content";
    std::string input_tokens_pointer = "/usage/prompt_tokens";
    std::string output_tokens_pointer = "/usage/completion_tokens";
    std::map<std::string, std::string> role_map; // e.g. {"tool": "user"}
    bool supports_media = false;
    bool send_tools = false;
    Json extra_body = Json::object(); // provider inference parameters

    static HttpProfile from_json(const Json &j);
};

class HttpBackend : public ChatBackend {
  public:
    explicit HttpBackend(HttpProfile profile);

    ChatReply complete(const std::vector<ChatMessage> &messages, const Json &tools) override;
    std::string model() const override { return profile_.model; }
    bool supports_media() const override { return profile_.supports_media; }

    Json request_body(const std::vector<ChatMessage> &messages, const Json &tools) const;
    ChatReply parse_response(const std::string &body) const;

  private:
    ChatReply attempt(const std::string &body) const;
    HttpProfile profile_;
};

/// Produces a fresh backend for each episode.
using BackendFactory = std::function<std::unique_ptr<ChatBackend>(const TaskSpec &)>;

/// Builds a factory from a backend spec, e.g. {"type": "oracle"},
/// {"type": "scripted", "playbook": [...], "cycle": true}, {"type": "noop"},
/// {"type": "echo"}, {"type": "all_pass"}, {"type": "http", "profile": {...} | "file"},
/// {"type": "per_task", "default": {...}, "tasks": {"id": {...}}}.
BackendFactory make_backend_factory(const Json &spec, const std::filesystem::path &base_dir = {});

/// Model label of a spec without instantiating network clients.
std::string backend_label(const Json &spec, const std::string &task_id = {});

std::map<std::string, std::string> task_variables(const TaskSpec &task);

inline const std::string kAllPassEvaluation =
    R"({"scores": {"role_consistency": 1, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""})";

} // namespace egoharness
