#include "egoharness/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

std::string_view to_string(HaltReason reason) {
    switch (reason) {
    case HaltReason::UserStop: return "USER_STOP";
    case HaltReason::TurnLimit: return "TURN_LIMIT";
    case HaltReason::ToolLimit: return "TOOL_LIMIT";
    case HaltReason::AgentError: return "AGENT_ERROR";
    case HaltReason::UserTerminated: return "USER_TERMINATED";
    }
    return "?";
}

HaltReason halt_reason_from_string(std::string_view s) {
    for (auto r : {HaltReason::UserStop, HaltReason::TurnLimit, HaltReason::ToolLimit, HaltReason::AgentError,
                   HaltReason::UserTerminated})
        if (to_string(r) == s) return r;
    throw CorruptLog("unknown halted_reason '" + std::string(s) + "'");
}

void EpisodeConfig::validate() const {
    if (max_user_turns <= 0 || max_tool_calls <= 0 || max_inner_iterations <= 0)
        throw ConfigError("episode bounds must be positive");
    if (complaint_termination < 0) throw ConfigError("complaint_termination must be non-negative");
}

BudgetVerdict enforce_budgets(const BudgetCounters &counters, const EpisodeConfig &config, std::size_t pending_calls) {
    BudgetVerdict v;
    if (pending_calls == 0) {
        if (counters.user_turns >= config.max_user_turns) {
            v.halt = true;
            v.reason = HaltReason::TurnLimit;
        }
        return v;
    }
    auto room = static_cast<std::size_t>(std::max(0, config.max_tool_calls - counters.tool_calls));
    if (pending_calls > room) {
        v.halt = true;
        v.reason = HaltReason::ToolLimit;
        v.executable = room;
    } else {
        v.executable = pending_calls;
    }
    return v;
}

namespace {

std::optional<Json> try_parse(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &) {
        return std::nullopt;
    }
}

/// Drops a ```json ... ``` fence around the whole message.
std::string strip_fence(std::string text) {
    if (text.rfind("```", 0) != 0 || text.size() < 6 || text.compare(text.size() - 3, 3, "```") != 0) return text;
    auto first_nl = text.find('\n');
    if (first_nl == std::string::npos) return text;
    return trim(std::string_view(text).substr(first_nl + 1, text.size() - 3 - first_nl - 1));
}

bool looks_like_call_list(const Json &j) {
    if (!j.is_array() || j.empty()) return false;
    for (const auto &e : j)
        if (e.is_object() && e.contains("tool_name")) return true;
    return false;
}

} // namespace

ParsedAgentMessage parse_agent_message(std::string_view raw) {
    ParsedAgentMessage out;
    out.text = std::string(raw);
    auto body = strip_fence(trim(raw));

    if (auto whole = try_parse(body)) {
        if (whole->is_array()) {
            out.emitted = *whole;
            if (whole->empty()) {
                out.format_violation = true;
                out.violation = "empty tool-call array";
                return out;
            }
            std::vector<ToolCall> calls;
            for (const auto &e : *whole) {
                auto shape = validate_call_shape(e);
                if (auto *err = std::get_if<ShapeError>(&shape)) {
                    out.format_violation = true;
                    out.violation = std::string(to_string(err->kind)) + ": " + err->detail;
                    return out;
                }
                calls.push_back(std::get<ToolCall>(std::move(shape)));
            }
            out.kind = AgentMessageKind::ToolBatch;
            out.calls = std::move(calls);
            return out;
        }
        if (whole->is_object() && whole->contains("tool_name")) {
            out.emitted = Json::array({*whole});
            out.format_violation = true;
            out.violation = "tool call not wrapped in a JSON array";
            return out;
        }
        return out;
    }

    auto open = body.find('[');
    auto close = body.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
        if (auto embedded = try_parse(std::string_view(body).substr(open, close - open + 1));
            embedded && looks_like_call_list(*embedded)) {
            out.emitted = *embedded;
            out.format_violation = true;
            out.violation = "MIXED_CONTENT: tool-call array surrounded by prose";
        }
    }
    return out;
}

std::string format_tool_results(const std::vector<std::string> &results) {
    std::string out;
    for (const auto &r : results) out += (out.empty() ? "" : "; ") + r;
    return out;
}

Json Trajectory::to_log(const TaskSpec &task) const {
    Json dialogue_json = Json::array();
    for (const auto &d : dialogue) {
        Json e{{"role", d.role}, {"turn", d.turn}, {"content", d.content}};
        if (!d.evaluation.is_null()) e["evaluation"] = d.evaluation;
        dialogue_json.push_back(std::move(e));
    }
    Json batches = Json::array();
    for (const auto &b : tool_batches) {
        Json calls = Json::array();
        for (const auto &c : b.calls) calls.push_back(c.to_json());
        batches.push_back({{"turn", b.turn}, {"calls", calls}, {"results", b.results}});
    }
    return Json{{"task_id", task_id},
                {"scenario_id", scenario_id},
                {"mode", to_string(mode)},
                {"model", model},
                {"instruction", task.instruction},
                {"image_description", task.image_description},
                {"dialogue", dialogue_json},
                {"tool_calls", batches},
                {"rounds_count", rounds_count},
                {"input_tokens", usage.input_tokens},
                {"output_tokens", usage.output_tokens},
                {"tool_calls_count", tool_calls_flat.size()},
                {"user_turns", user_turns},
                {"halted_reason", to_string(halted_reason)},
                {"error", error},
                {"emitted_calls", emitted_calls},
                {"format_violations", format_violations},
                {"final_reply", final_reply},
                {"final_digest", final_digest.digest},
                {"covered_collections", final_digest.covered_collections}};
}

Trajectory Trajectory::from_log(const Json &log) {
    try {
        Trajectory t;
        t.task_id = log.at("task_id").get<std::string>();
        t.scenario_id = log.at("scenario_id").get<std::string>();
        t.mode = mode_from_string(log.at("mode").get<std::string>());
        t.model = log.at("model").get<std::string>();
        for (const auto &d : log.at("dialogue"))
            t.dialogue.push_back(DialogueEntry{d.at("role").get<std::string>(), d.at("turn").get<int>(),
                                               d.at("content").get<std::string>(), d.value("evaluation", Json())});
        for (const auto &b : log.at("tool_calls")) {
            ToolBatchRecord rec;
            rec.turn = b.at("turn").get<int>();
            for (const auto &c : b.at("calls"))
                rec.calls.push_back(ToolCall{c.at("tool_name").get<std::string>(), c.at("parameters")});
            rec.results = b.at("results").get<std::vector<std::string>>();
            t.tool_calls_flat.insert(t.tool_calls_flat.end(), rec.calls.begin(), rec.calls.end());
            t.tool_batches.push_back(std::move(rec));
        }
        t.rounds_count = log.at("rounds_count").get<int>();
        t.usage.input_tokens = log.at("input_tokens").get<std::uint64_t>();
        t.usage.output_tokens = log.at("output_tokens").get<std::uint64_t>();
        if (log.at("tool_calls_count").get<std::size_t>() != t.tool_calls_flat.size())
            throw CorruptLog(t.task_id + ": tool_calls_count disagrees with the recorded calls");
        t.user_turns = log.at("user_turns").get<int>();
        t.halted_reason = halt_reason_from_string(log.at("halted_reason").get<std::string>());
        t.error = log.value("error", "");
        t.emitted_calls = log.at("emitted_calls");
        t.format_violations = log.at("format_violations").get<std::vector<std::string>>();
        t.final_reply = log.value("final_reply", "");
        t.final_digest.digest = log.at("final_digest").get<std::string>();
        t.final_digest.covered_collections = log.value("covered_collections", std::vector<std::string>{});
        return t;
    } catch (const Json::exception &e) {
        throw CorruptLog(e.what());
    } catch (const ConfigError &e) {
        throw CorruptLog(e.what());
    }
}

namespace {

std::string service_prompt(const PromptSet &prompts, const ToolRegistry &registry) {
    return render_template(prompts.service_agent, {{"tool_descriptions", registry.documents().dump(2)}});
}

} // namespace

Trajectory run_episode(const TaskSpec &task, AgentAdapter &agent, UserSimulator &user, ScenarioDatabase &db,
                       const ToolRegistry &registry, const EpisodeConfig &config, const PromptSet &prompts) {
    config.validate();
    Trajectory traj;
    traj.task_id = task.task_id;
    traj.scenario_id = task.scenario_id;
    traj.mode = config.mode;
    traj.model = agent.model();

    std::vector<ChatMessage> history;
    history.push_back({Role::System, service_prompt(prompts, registry), {}});
    history.push_back({Role::Assistant, std::string(kAgentGreeting), {}});
    std::string a_prev(kAgentGreeting);
    BudgetCounters counters;
    int complaints = 0;
    bool done = false;

    auto halt = [&](HaltReason reason, std::string error = {}) {
        traj.halted_reason = reason;
        traj.error = std::move(error);
        done = true;
    };

    for (int t = 0; !done; ++t) {
        if (auto v = enforce_budgets(counters, config, 0); v.halt) {
            halt(v.reason);
            break;
        }

        GatedTurn gated;
        try {
            gated = user.gate_user_turn(a_prev);
        } catch (const Error &e) {
            halt(HaltReason::AgentError, std::string("user simulator: ") + e.what());
            break;
        }
        ++counters.user_turns;
        traj.user_turns = counters.user_turns;
        traj.dialogue.push_back({"user", t, gated.text, gated.evaluation_json()});

        if (is_stop(gated.text)) {
            halt(HaltReason::UserStop);
            break;
        }
        complaints = is_complaint(gated.text) ? complaints + 1 : 0;
        if (config.mode == InteractionMode::DynamicHard && config.complaint_termination > 0 &&
            complaints >= config.complaint_termination) {
            halt(HaltReason::UserTerminated);
            break;
        }

        ChatMessage user_msg{Role::User, gated.text, {}};
        if (t == 0 && task.media) user_msg.media.push_back(*task.media);
        history.push_back(std::move(user_msg));

        bool replied = false;
        for (int i = 0; i < config.max_inner_iterations && !done; ++i) {
            ChatReply reply;
            try {
                reply = agent.send(history);
            } catch (const Error &e) {
                halt(HaltReason::AgentError, std::string("agent: ") + e.what());
                break;
            }
            traj.usage = agent.usage();
            history.push_back({Role::Assistant, reply.text, {}});
            auto parsed = parse_agent_message(reply.text);
            for (const auto &e : parsed.emitted) traj.emitted_calls.push_back(e);
            if (parsed.format_violation) traj.format_violations.push_back(parsed.violation);

            if (parsed.kind == AgentMessageKind::NaturalReply) {
                a_prev = reply.text;
                traj.final_reply = reply.text;
                ++traj.rounds_count;
                traj.dialogue.push_back({"assistant", t, reply.text, nullptr});
                replied = true;
                break;
            }

            auto verdict = enforce_budgets(counters, config, parsed.calls.size());
            ToolBatchRecord batch;
            batch.turn = t;
            for (std::size_t k = 0; k < verdict.executable; ++k) {
                const auto &call = parsed.calls[k];
                auto result = execute(db, call, registry, config.execute);
                batch.calls.push_back(call);
                batch.results.push_back(result.serialize());
                traj.tool_calls_flat.push_back(call);
                ++counters.tool_calls;
            }
            if (verdict.executable < parsed.calls.size())
                spdlog::info("task {}: tool budget reached, dropping {} call(s)", task.task_id,
                             parsed.calls.size() - verdict.executable);
            if (!batch.calls.empty()) {
                history.push_back({Role::Tool, format_tool_results(batch.results), {}});
                traj.tool_batches.push_back(std::move(batch));
            }
            if (verdict.halt) halt(verdict.reason);
        }
        if (done) break;
        if (!replied) {
            halt(HaltReason::AgentError, "agent did not reply in natural language within " +
                                             std::to_string(config.max_inner_iterations) + " iterations");
            break;
        }
        if (config.mode == InteractionMode::Static) {
            halt(HaltReason::UserStop);
            break;
        }
        try {
            user.summarize_turn(a_prev, gated.text);
        } catch (const Error &e) {
            halt(HaltReason::AgentError, std::string("user simulator: ") + e.what());
        }
    }
    traj.final_digest = snapshot(db);
    return traj;
}

} // namespace egoharness
