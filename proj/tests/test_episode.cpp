#include <fstream>

#include <doctest.h>

#include "egoharness/backends.hpp"
#include "egoharness/errors.hpp"
#include "egoharness/orchestrator.hpp"
#include "egoharness/toolsets.hpp"
#include "support.hpp"

using namespace egoharness;

namespace {

const char *kRead = R"({"tool_name": "get_price", "parameters": {"product_name": "zonin prosecco"}})";

struct Fixture {
    PromptSet prompts = PromptSet::load();
    ScenarioDatabase pristine = test::demo_db("retail");
    ToolRegistry registry = retail_toolset();
    TaskSpec task;

    Fixture() {
        auto tasks = load_tasks(test::data_dir() / "demo_pack" / "tasks.json");
        task = tasks.front();
    }

    Trajectory episode(ChatBackend &agent_backend, ChatBackend &actor, EpisodeConfig cfg,
                       ScenarioDatabase *out = nullptr) {
        ScriptedBackend evaluator({kAllPassEvaluation}, true);
        ScriptedBackend summarizer({"Summary."}, true);
        UserSimulator user(task, cfg.mode, prompts, {actor, evaluator, summarizer});
        AgentAdapter agent(agent_backend, registry.documents(), {});
        ScenarioDatabase db = pristine;
        auto t = run_episode(task, agent, user, db, registry, cfg, prompts);
        if (out) *out = db;
        return t;
    }
};

std::string batch_of(int n) {
    std::string s = "[";
    for (int i = 0; i < n; ++i) s += std::string(i ? ", " : "") + kRead;
    return s + "]";
}

} // namespace

TEST_CASE("parse_agent_message") {
    auto batch = parse_agent_message(batch_of(2));
    CHECK(batch.kind == AgentMessageKind::ToolBatch);
    CHECK(batch.calls.size() == 2);
    CHECK_FALSE(batch.format_violation);

    auto fenced = parse_agent_message(std::string("```json\n") + batch_of(1) + "\n```");
    CHECK(fenced.kind == AgentMessageKind::ToolBatch);

    auto text = parse_agent_message("Your cart holds four items.");
    CHECK(text.kind == AgentMessageKind::NaturalReply);
    CHECK_FALSE(text.format_violation);
    CHECK(text.emitted.empty());

    auto empty = parse_agent_message("[]");
    CHECK(empty.kind == AgentMessageKind::NaturalReply);
    CHECK(empty.format_violation);

    auto broken = parse_agent_message(R"([{"tool_name": "get_price"}])");
    CHECK(broken.kind == AgentMessageKind::NaturalReply);
    CHECK(broken.format_violation);
    CHECK(broken.emitted.size() == 1);

    auto mixed = parse_agent_message(std::string("Sure! ") + batch_of(1) + " Done.");
    CHECK(mixed.kind == AgentMessageKind::NaturalReply);
    CHECK(mixed.format_violation);
    CHECK(mixed.violation.rfind("MIXED_CONTENT", 0) == 0);
    CHECK(mixed.emitted.size() == 1);

    auto bare = parse_agent_message(kRead);
    CHECK(bare.kind == AgentMessageKind::NaturalReply);
    CHECK(bare.format_violation);

    auto prose_list = parse_agent_message("Pick one of [1, 2, 3].");
    CHECK_FALSE(prose_list.format_violation);
}

TEST_CASE("enforce_budgets") {
    EpisodeConfig cfg;
    CHECK_FALSE(enforce_budgets({9, 0}, cfg, 0).halt);
    auto turns = enforce_budgets({10, 0}, cfg, 0);
    CHECK(turns.halt);
    CHECK(turns.reason == HaltReason::TurnLimit);
    auto ok = enforce_budgets({0, 197}, cfg, 3);
    CHECK_FALSE(ok.halt);
    CHECK(ok.executable == 3);
    auto cut = enforce_budgets({0, 199}, cfg, 3);
    CHECK(cut.halt);
    CHECK(cut.reason == HaltReason::ToolLimit);
    CHECK(cut.executable == 1);
    auto full = enforce_budgets({0, 200}, cfg, 1);
    CHECK(full.halt);
    CHECK(full.executable == 0);
    EpisodeConfig bad;
    bad.max_tool_calls = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("oracle episode reaches the ground-truth state") {
    Fixture f;
    OracleAgent agent(f.task.ground_truth.tool_calls);
    ScriptedBackend actor({"Hello. {instruction}", "STOP"});
    EpisodeConfig cfg;
    ScenarioDatabase final_db;
    auto t = f.episode(agent, actor, cfg, &final_db);
    CHECK(t.halted_reason == HaltReason::UserStop);
    CHECK(t.tool_calls_flat == f.task.ground_truth.tool_calls);
    CHECK(t.rounds_count == 1);
    CHECK(t.user_turns == 2);
    REQUIRE(t.dialogue.size() == 3);
    CHECK(t.dialogue[0].role == "user");
    CHECK(t.dialogue[1].role == "assistant");
    CHECK(t.dialogue[2].content == "STOP");
    REQUIRE(t.tool_batches.size() == 1);
    CHECK(t.tool_batches[0].results.size() == 3);
    CHECK(t.final_digest == snapshot(final_db));
    CHECK_FALSE(t.final_digest == snapshot(f.pristine));
}

TEST_CASE("tool budget truncates the batch that crosses the cap") {
    Fixture f;
    FunctionBackend agent([](const auto &, const auto &) { return ChatReply{batch_of(3), {}}; }, "spam");
    ScriptedBackend actor({"go"}, true);
    EpisodeConfig cfg;
    cfg.max_tool_calls = 5;
    auto t = f.episode(agent, actor, cfg);
    CHECK(t.halted_reason == HaltReason::ToolLimit);
    CHECK(t.tool_calls_flat.size() == 5);
    CHECK(t.tool_batches.back().calls.size() == 2);
}

TEST_CASE("turn budget") {
    Fixture f;
    NoopBackend agent;
    ScriptedBackend actor({"again"}, true);
    EpisodeConfig cfg;
    cfg.max_user_turns = 3;
    auto t = f.episode(agent, actor, cfg);
    CHECK(t.halted_reason == HaltReason::TurnLimit);
    CHECK(t.user_turns == 3);
    CHECK(t.rounds_count == 3);
}

TEST_CASE("inner loop bound ends the episode with an agent error") {
    Fixture f;
    FunctionBackend agent([](const auto &, const auto &) { return ChatReply{batch_of(1), {}}; }, "looper");
    ScriptedBackend actor({"go"}, true);
    EpisodeConfig cfg;
    cfg.max_inner_iterations = 4;
    auto t = f.episode(agent, actor, cfg);
    CHECK(t.halted_reason == HaltReason::AgentError);
    CHECK(t.tool_calls_flat.size() == 4);
    CHECK(t.error.find("4 iterations") != std::string::npos);
}

TEST_CASE("backend failures become agent errors") {
    Fixture f;
    FunctionBackend agent([](const auto &, const auto &) -> ChatReply { throw TransportError("connection refused"); },
                          "down");
    ScriptedBackend actor({"go"}, true);
    auto t = f.episode(agent, actor, EpisodeConfig{});
    CHECK(t.halted_reason == HaltReason::AgentError);
    CHECK(t.error == "agent: transport error: connection refused");
    CHECK(t.final_digest == snapshot(f.pristine));
}

TEST_CASE("static episode: one user message, one reply") {
    Fixture f;
    OracleAgent agent(f.task.ground_truth.tool_calls);
    ScriptedBackend actor({"Please do everything."}, true);
    EpisodeConfig cfg;
    cfg.mode = InteractionMode::Static;
    auto t = f.episode(agent, actor, cfg);
    CHECK(t.halted_reason == HaltReason::UserStop);
    REQUIRE(t.dialogue.size() == 2);
    CHECK(t.dialogue[0].content == "Please do everything. " + f.prompts.static_ending);
    CHECK(t.user_turns == 1);
}

TEST_CASE("hard mode can end on repeated complaints") {
    Fixture f;
    NoopBackend agent;
    ScriptedBackend actor({"Bad Service Agent! Try again."}, true);
    EpisodeConfig cfg;
    cfg.mode = InteractionMode::DynamicHard;
    cfg.complaint_termination = 2;
    auto t = f.episode(agent, actor, cfg);
    CHECK(t.halted_reason == HaltReason::UserTerminated);
    CHECK(t.user_turns == 2);
}

TEST_CASE("format violations are logged and nothing executes") {
    Fixture f;
    int n = 0;
    FunctionBackend agent([&](const auto &, const auto &) { return ChatReply{n++ ? "Done." : "Sure: " + batch_of(1), {}}; },
                          "chatty");
    ScriptedBackend actor({"go", "STOP"});
    auto t = f.episode(agent, actor, EpisodeConfig{});
    CHECK(t.tool_calls_flat.empty());
    CHECK(t.format_violations.size() == 1);
    CHECK(t.emitted_calls.size() == 1);
}

TEST_CASE("trajectory log round-trip") {
    Fixture f;
    OracleAgent agent(f.task.ground_truth.tool_calls, 1);
    ScriptedBackend actor({"Hello", "STOP"});
    auto t = f.episode(agent, actor, EpisodeConfig{});
    auto log = t.to_log(f.task);
    CHECK(log["tool_calls_count"] == 3);
    CHECK(log["tool_calls"].size() == 3);
    CHECK(log["tool_calls"][0]["results"][0].is_string());
    CHECK(log["instruction"] == f.task.instruction);
    auto back = Trajectory::from_log(log);
    CHECK(back.to_log(f.task) == log);
    log["tool_calls_count"] = 7;
    CHECK_THROWS_AS(Trajectory::from_log(log), CorruptLog);
    CHECK_THROWS_AS(Trajectory::from_log(Json::object()), CorruptLog);
}
