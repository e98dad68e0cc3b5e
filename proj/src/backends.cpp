#include "egoharness/backends.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/prompts.hpp"

namespace egoharness {

ScriptedBackend::ScriptedBackend(std::vector<std::string> playbook, bool cycle, std::map<std::string, std::string> vars,
                                 std::string model)
    : playbook_(std::move(playbook)), cycle_(cycle), vars_(std::move(vars)), model_(std::move(model)) {
    if (playbook_.empty()) throw ConfigError("scripted backend needs a non-empty playbook");
}

ChatReply ScriptedBackend::complete(const std::vector<ChatMessage> &messages, const Json &) {
    last_ = messages;
    std::size_t i = calls_++;
    if (i >= playbook_.size()) i = cycle_ ? i % playbook_.size() : playbook_.size() - 1;
    return ChatReply{render_template(playbook_[i], vars_), {}};
}

ChatReply EchoBackend::complete(const std::vector<ChatMessage> &messages, const Json &) {
    if (messages.empty()) throw PreconditionError("echo backend received no messages");
    return ChatReply{messages.back().content, {}};
}

ChatReply NoopBackend::complete(const std::vector<ChatMessage> &, const Json &) {
    return ChatReply{"Sorry, I am unable to help with that.", {}};
}

OracleAgent::OracleAgent(std::vector<ToolCall> calls, std::size_t batch_size)
    : calls_(std::move(calls)), batch_size_(batch_size) {}

ChatReply OracleAgent::complete(const std::vector<ChatMessage> &messages, const Json &) {
    if (next_ < calls_.size()) {
        std::size_t n = batch_size_ == 0 ? calls_.size() - next_ : std::min(batch_size_, calls_.size() - next_);
        Json batch = Json::array();
        for (std::size_t i = 0; i < n; ++i) batch.push_back(calls_[next_ + i].to_json());
        next_ += n;
        return ChatReply{batch.dump(), {}};
    }
    if (!messages.empty() && messages.back().role == Role::Tool)
        return ChatReply{"All of your requests have been completed.", {}};
    return ChatReply{"Thank you. Everything you asked for is done.", {}};
}

HttpProfile HttpProfile::from_json(const Json &j) {
    try {
        HttpProfile p;
        p.base_url = j.at("base_url").get<std::string>();
        p.path = j.value("path", p.path);
        p.model = j.value("model", "");
        p.api_key_env = j.value("api_key_env", "");
        p.auth_header = j.value("auth_header", p.auth_header);
        p.auth_prefix = j.value("auth_prefix", p.auth_prefix);
        p.timeout_s = j.value("timeout_s", p.timeout_s);
        p.retry.max_retries = j.value("retries", p.retry.max_retries);
        p.retry.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<int>(p.retry.backoff.count())));
        p.text_pointer = j.value("text_pointer", p.text_pointer);
        p.input_tokens_pointer = j.value("input_tokens_pointer", p.input_tokens_pointer);
        p.output_tokens_pointer = j.value("output_tokens_pointer", p.output_tokens_pointer);
        if (j.contains("role_map")) p.role_map = j.at("role_map").get<std::map<std::string, std::string>>();
        p.supports_media = j.value("supports_media", false);
        p.send_tools = j.value("send_tools", false);
        if (j.contains("extra_body")) p.extra_body = j.at("extra_body");
        return p;
    } catch (const Json::exception &e) {
        throw ConfigError(std::string("http profile: ") + e.what());
    }
}

HttpBackend::HttpBackend(HttpProfile profile) : profile_(std::move(profile)) {
    if (profile_.base_url.empty()) throw ConfigError("http profile lacks base_url");
}

Json HttpBackend::request_body(const std::vector<ChatMessage> &messages, const Json &tools) const {
    Json body = profile_.extra_body;
    if (!profile_.model.empty()) body["model"] = profile_.model;
    Json msgs = Json::array();
    for (const auto &m : messages) {
        std::string role(to_string(m.role));
        if (auto it = profile_.role_map.find(role); it != profile_.role_map.end()) role = it->second;
        Json jm{{"role", role}, {"content", m.content}};
        if (profile_.supports_media && !m.media.empty()) {
            Json media = Json::array();
            for (const auto &ref : m.media) media.push_back(ref.to_json());
            jm["media"] = std::move(media);
        }
        msgs.push_back(std::move(jm));
    }
    body["messages"] = std::move(msgs);
    if (profile_.send_tools && tools.is_array() && !tools.empty()) body["tools"] = tools;
    return body;
}

ChatReply HttpBackend::parse_response(const std::string &text) const {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    auto pointer = [&](const std::string &p) -> const Json * {
        if (p.empty()) return nullptr;
        try {
            Json::json_pointer jp(p);
            return doc.contains(jp) ? &doc.at(jp) : nullptr;
        } catch (const Json::exception &) {
            return nullptr;
        }
    };
    const auto *content = pointer(profile_.text_pointer);
    if (!content || !content->is_string()) throw ProtocolError("no text at " + profile_.text_pointer);
    ChatReply reply{content->get<std::string>(), {}};
    if (const auto *in = pointer(profile_.input_tokens_pointer); in && in->is_number_unsigned())
        reply.usage.input_tokens = in->get<std::uint64_t>();
    if (const auto *out = pointer(profile_.output_tokens_pointer); out && out->is_number_unsigned())
        reply.usage.output_tokens = out->get<std::uint64_t>();
    return reply;
}

ChatReply HttpBackend::attempt(const std::string &body) const {
    httplib::Client client(profile_.base_url);
    auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(profile_.timeout_s));
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  timeout.count() % 1000000);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), timeout.count() % 1000000);
    httplib::Headers headers;
    if (!profile_.api_key_env.empty()) {
        const char *key = std::getenv(profile_.api_key_env.c_str());
        if (!key) throw ConfigError("credential variable " + profile_.api_key_env + " is not set");
        headers.emplace(profile_.auth_header, profile_.auth_prefix + key);
    }
    auto res = client.Post(profile_.path, headers, body, "application/json");
    if (!res) throw TransportError(profile_.base_url + ": " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError(profile_.base_url + ": HTTP " + std::to_string(res->status));
    if (res->status != 200) throw ProtocolError("HTTP " + std::to_string(res->status) + ": " + res->body);
    return parse_response(res->body);
}

ChatReply HttpBackend::complete(const std::vector<ChatMessage> &messages, const Json &tools) {
    auto body = request_body(messages, tools).dump();
    return with_retries(profile_.retry, [&] { return attempt(body); });
}

std::map<std::string, std::string> task_variables(const TaskSpec &task) {
    return {{"user_id", task.ground_truth.user_id},
            {"instruction", task.instruction},
            {"task_id", task.task_id},
            {"image_description", task.image_description}};
}

namespace {

Json resolve_profile(const Json &spec, const std::filesystem::path &base_dir) {
    const auto &p = spec.at("profile");
    if (!p.is_string()) return p;
    auto path = base_dir / p.get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open backend profile " + path.string());
    return Json::parse(in);
}

const Json &spec_for_task(const Json &spec, const std::string &task_id) {
    if (spec.value("type", "") != "per_task") return spec;
    if (auto tasks = spec.find("tasks"); tasks != spec.end() && tasks->contains(task_id))
        return spec_for_task(tasks->at(task_id), task_id);
    return spec_for_task(spec.at("default"), task_id);
}

} // namespace

BackendFactory make_backend_factory(const Json &spec, const std::filesystem::path &base_dir) {
    if (!spec.is_object() || !spec.contains("type")) throw ConfigError("backend spec needs a 'type'");
    auto type = spec.at("type").get<std::string>();
    if (type == "per_task") {
        if (!spec.contains("default")) throw ConfigError("per_task backend needs a 'default'");
        std::map<std::string, BackendFactory> per_task;
        const Json tasks = spec.value("tasks", Json::object());
        for (const auto &[id, sub] : tasks.items())
            per_task.emplace(id, make_backend_factory(sub, base_dir));
        auto fallback = make_backend_factory(spec.at("default"), base_dir);
        return [per_task, fallback](const TaskSpec &t) {
            auto it = per_task.find(t.task_id);
            return it != per_task.end() ? it->second(t) : fallback(t);
        };
    }
    if (type == "oracle") {
        std::size_t batch = spec.value("batch_size", 0);
        return [batch](const TaskSpec &t) { return std::make_unique<OracleAgent>(t.ground_truth.tool_calls, batch); };
    }
    if (type == "noop") return [](const TaskSpec &) { return std::make_unique<NoopBackend>(); };
    if (type == "echo") return [](const TaskSpec &) { return std::make_unique<EchoBackend>(); };
    if (type == "all_pass")
        return [](const TaskSpec &) {
            return std::make_unique<ScriptedBackend>(std::vector<std::string>{kAllPassEvaluation}, true,
                                                     std::map<std::string, std::string>{}, "all_pass");
        };
    if (type == "scripted") {
        auto playbook = spec.at("playbook").get<std::vector<std::string>>();
        bool cycle = spec.value("cycle", false);
        auto model = spec.value("model", "scripted");
        return [playbook, cycle, model](const TaskSpec &t) {
            return std::make_unique<ScriptedBackend>(playbook, cycle, task_variables(t), model);
        };
    }
    if (type == "http") {
        auto profile = HttpProfile::from_json(resolve_profile(spec, base_dir));
        return [profile](const TaskSpec &) { return std::make_unique<HttpBackend>(profile); };
    }
    throw ConfigError("unknown backend type '" + type + "'");
}

std::string backend_label(const Json &spec, const std::string &task_id) {
    const auto &s = spec_for_task(spec, task_id);
    auto type = s.value("type", "");
    if (type == "http" && s.contains("profile") && s.at("profile").is_object())
        return s.at("profile").value("model", "http");
    return s.value("model", type);
}

} // namespace egoharness
