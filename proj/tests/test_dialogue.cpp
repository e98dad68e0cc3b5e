#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "egoharness/backends.hpp"
#include "egoharness/errors.hpp"
#include "egoharness/orchestrator.hpp"
#include "egoharness/toolsets.hpp"
#include "support.hpp"

using namespace egoharness;

namespace {

const std::string kFail =
    R"({"scores": {"role_consistency": 1, "instruction_following": 0, "resilience": 1, "contextual_robustness": 1}, "suggestion": "Mention the user id."})";

TaskSpec sample_task() {
    TaskSpec t;
    t.task_id = "t1";
    t.scenario_id = "retail";
    t.instruction = "Buy one bottle of riunite moscato. User ID: grace_liu_999.";
    t.image_description = "A pale bottle of moscato.";
    t.ground_truth.task_id = "t1";
    t.ground_truth.user_id = "grace_liu_999";
    return t;
}

/// Runs an HTTP server on a free port for the lifetime of the object.
struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    TestServer() = default;
    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

} // namespace

TEST_CASE("prompt templates load and render") {
    auto prompts = PromptSet::load();
    CHECK(prompts.static_ending ==
          "I have stated all my requirements. Please do not ask me anything further. Complete all of these "
          "requirements before speaking to me again.");
    CHECK(prompts.user_easy.find("{user_instruction}") != std::string::npos);
    CHECK(prompts.service_agent.find("{tool_descriptions}") != std::string::npos);
    CHECK(render_template("a {x} {{literal}} {unknown}", {{"x", "1"}}) == "a 1 {literal} {unknown}");
}

TEST_CASE("task parsing checks the user id") {
    Json good = Json::parse(R"({"tasks": [{"task_id": "a", "scenario_id": "retail", "instruction": "Do it. User ID: bob_1.",
        "image_description": "", "ground_truth": {"tool_calls": [], "perception_anchors": []}}]})");
    auto tasks = parse_tasks(good);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].ground_truth.user_id == "bob_1");
    Json bad = good;
    bad["tasks"][0]["ground_truth"]["user_id"] = "carol_2";
    CHECK_THROWS_AS(parse_tasks(bad), TaskError);
    Json missing = good;
    missing["tasks"][0]["instruction"] = "Do it.";
    CHECK_THROWS_AS(parse_tasks(missing), TaskError);
    CHECK(extract_user_id("my user id is dan_9 thanks") == "dan_9");
}

TEST_CASE("criteria parsing is strict") {
    auto pass = CriteriaScores::parse(kAllPassEvaluation);
    CHECK(pass.all_pass());
    CHECK(pass.average() == 1.0);
    auto fail = CriteriaScores::parse(kFail);
    CHECK_FALSE(fail.all_pass());
    CHECK(fail.average() == doctest::Approx(0.75));
    CHECK(fail.suggestion == "Mention the user id.");
    auto fenced = CriteriaScores::parse("```json\n" + kAllPassEvaluation + "\n```");
    CHECK(fenced.all_pass());
    CHECK_THROWS_AS(CriteriaScores::parse("looks fine"), MalformedEvaluation);
    CHECK_THROWS_AS(CriteriaScores::parse(R"({"scores": {"role_consistency": 2, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""})"),
                    MalformedEvaluation);
    CHECK_THROWS_AS(CriteriaScores::parse(R"({"scores": {"role_consistency": 0, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""})"),
                    MalformedEvaluation);
    auto cleared = CriteriaScores::parse(R"({"scores": {"role_consistency": 1, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": "Be nicer."})");
    CHECK(cleared.suggestion.empty());
}

TEST_CASE("gate: one correction pass, forwarded even if it fails again") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    ScriptedBackend actor({"first draft", "second draft"});
    ScriptedBackend evaluator({kFail, kFail});
    ScriptedBackend summarizer({"summary."});
    UserSimulator user(task, InteractionMode::DynamicEasy, prompts, {actor, evaluator, summarizer});
    auto turn = user.gate_user_turn("Dear customer, how can I help you?");
    CHECK(turn.text == "second draft");
    CHECK(turn.correction_applied);
    CHECK(turn.original_response == "first draft");
    CHECK(turn.actor_calls == 2);
    CHECK(turn.evaluator_calls == 2);
    CHECK(actor.invocations() == 2);
    CHECK(evaluator.invocations() == 2);
    CHECK(user.state().feedback == "Mention the user id.");
    // the corrected actor prompt carries the feedback and the first draft
    auto prompt = actor.last_messages().front().content;
    CHECK(prompt.find("Mention the user id.") != std::string::npos);
    CHECK(prompt.find("first draft") != std::string::npos);
    auto log = turn.evaluation_json();
    CHECK(log["correction_applied"] == true);
    CHECK(log["original_response"] == "first draft");
}

TEST_CASE("gate: a passing first draft costs one call each") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    ScriptedBackend actor({"hello"});
    ScriptedBackend evaluator({kAllPassEvaluation}, true);
    ScriptedBackend summarizer({"s."});
    UserSimulator user(task, InteractionMode::DynamicEasy, prompts, {actor, evaluator, summarizer});
    auto turn = user.gate_user_turn("hi");
    CHECK(turn.actor_calls == 1);
    CHECK(turn.evaluator_calls == 1);
    CHECK_FALSE(turn.correction_applied);
    CHECK(turn.evaluation_json()["original_response"].is_null());
}

TEST_CASE("gate: malformed evaluation is re-queried once") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    ScriptedBackend actor({"hello"});
    ScriptedBackend evaluator({"not json", kAllPassEvaluation});
    ScriptedBackend summarizer({"s."});
    UserSimulator user(task, InteractionMode::DynamicEasy, prompts, {actor, evaluator, summarizer});
    CHECK(user.gate_user_turn("hi").text == "hello");
    ScriptedBackend broken({"not json"});
    UserSimulator user2(task, InteractionMode::DynamicEasy, prompts, {actor, broken, summarizer});
    CHECK_THROWS_AS(user2.gate_user_turn("hi"), MalformedEvaluation);
}

TEST_CASE("static mode appends the ending sentence once") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    ScriptedBackend actor({"Please add the moscato to my cart.", "Done? " + prompts.static_ending});
    ScriptedBackend evaluator({kAllPassEvaluation}, true);
    ScriptedBackend summarizer({"s."});
    UserSimulator user(task, InteractionMode::Static, prompts, {actor, evaluator, summarizer});
    auto a = user.gate_user_turn("hi").text;
    CHECK(a == "Please add the moscato to my cart. " + prompts.static_ending);
    auto b = user.gate_user_turn("hi").text;
    CHECK(b == "Done? " + prompts.static_ending);
}

TEST_CASE("hard mode noise is reproducible per seed") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    auto pools = load_noise_pools();
    REQUIRE(pools.at("retail").size() >= 10);
    auto draw = [&](std::uint64_t seed) {
        ScriptedBackend actor({"I want wine."}, true);
        ScriptedBackend evaluator({kAllPassEvaluation}, true);
        ScriptedBackend summarizer({"s."});
        UserSimulator user(task, InteractionMode::DynamicHard, prompts, {actor, evaluator, summarizer},
                           pools.at("retail"), seed);
        std::vector<std::string> out;
        for (int i = 0; i < 5; ++i) out.push_back(user.gate_user_turn("hi").text);
        return out;
    };
    auto a = draw(1), b = draw(1), c = draw(2);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto &m : a) CHECK(m.rfind("I want wine. ", 0) == 0);
    CHECK(episode_seed(1, "x") != episode_seed(1, "y"));
}

TEST_CASE("STOP and complaint detection") {
    CHECK(is_stop("STOP"));
    CHECK(is_stop("  STOP  "));
    CHECK(is_stop("Thanks. STOP"));
    CHECK(is_stop("STOP I forgot my bag."));
    CHECK_FALSE(is_stop("STOPPED"));
    CHECK_FALSE(is_stop("please stop"));
    CHECK(is_complaint("Bad Service Agent! Do it again."));
    CHECK_FALSE(is_complaint("The Bad Service Agent"));
}

TEST_CASE("summaries replace the previous one") {
    auto task = sample_task();
    auto prompts = PromptSet::load();
    ScriptedBackend actor({"x"});
    ScriptedBackend evaluator({kAllPassEvaluation}, true);
    ScriptedBackend summarizer({"First.", "Second."});
    UserSimulator user(task, InteractionMode::DynamicEasy, prompts, {actor, evaluator, summarizer});
    CHECK(user.summarize_turn("a", "u") == "First.");
    CHECK(user.summarize_turn("a", "u") == "Second.");
    CHECK(summarizer.last_messages().front().content.find("First.") != std::string::npos);
    CHECK(user.state().summary == "Second.");
}

TEST_CASE("adapter: preconditions, media degradation and truncation") {
    EchoBackend echo;
    AgentAdapter adapter(echo, Json::array(), AdapterConfig{std::nullopt, "A gold-capped bottle."});
    CHECK_THROWS_AS(adapter.send({}), PreconditionError);
    CHECK_THROWS_AS(adapter.send({{Role::User, "hi", {}}}), PreconditionError);
    std::vector<ChatMessage> h{{Role::System, "sys", {}}, {Role::User, "look", {MediaRef{"file://clip.mp4"}}}};
    CHECK(adapter.send(h).text == "look\n\n[Scene description] A gold-capped bottle.");
    CHECK(adapter.degraded_media());

    std::vector<ChatMessage> long_history{{Role::System, "s", {}},
                                          {Role::Tool, std::string(100, 'a'), {}},
                                          {Role::Tool, std::string(100, 'b'), {}},
                                          {Role::User, "last", {}}};
    AgentAdapter tight(echo, Json::array(), AdapterConfig{170, ""});
    CHECK(tight.send(long_history).text == "last");
    CHECK(tight.truncated_payloads() == 1);
    auto copy = long_history;
    CHECK(truncate_history(copy, 10) == 2);
    CHECK(copy[1].content == kTruncatedMarker);
    CHECK(copy[3].content == "last");
}

TEST_CASE("http backend against a local server") {
    TestServer srv;
    Json seen;
    int failures_left = 1;
    srv.server.Post("/v1/chat/completions", [&](const httplib::Request &req, httplib::Response &res) {
        if (failures_left-- > 0) {
            res.status = 503;
            return;
        }
        seen = Json::parse(req.body);
        Json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", seen["messages"].back()["content"]}}}}}},
                   {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 3}}}};
        res.set_content(reply.dump(), "application/json");
    });
    srv.server.Post("/bad", [](const httplib::Request &, httplib::Response &res) { res.status = 400; });
    srv.start();

    HttpProfile profile;
    profile.base_url = "http://127.0.0.1:" + std::to_string(srv.port);
    profile.model = "echo-model";
    profile.retry = RetryPolicy{2, std::chrono::milliseconds(1)};
    profile.role_map = {{"tool", "user"}};
    profile.extra_body = {{"temperature", 0}};
    HttpBackend backend(profile);
    auto reply = backend.complete({{Role::System, "s", {}}, {Role::Tool, "ping", {}}}, Json::array());
    CHECK(reply.text == "ping");
    CHECK(reply.usage.input_tokens == 11);
    CHECK(reply.usage.output_tokens == 3);
    CHECK(seen["model"] == "echo-model");
    CHECK(seen["temperature"] == 0);
    CHECK(seen["messages"][1]["role"] == "user");

    profile.path = "/bad";
    CHECK_THROWS_AS(HttpBackend(profile).complete({{Role::User, "x", {}}}, Json::array()), ProtocolError);

    HttpProfile dead;
    dead.base_url = "http://127.0.0.1:1";
    dead.timeout_s = 0.5;
    dead.retry = RetryPolicy{1, std::chrono::milliseconds(1)};
    CHECK_THROWS_AS(HttpBackend(dead).complete({{Role::User, "x", {}}}, Json::array()), TransportError);
    CHECK_THROWS_AS(HttpBackend(profile).parse_response("{}"), ProtocolError);
}

TEST_CASE("retries stop after the policy limit") {
    int calls = 0;
    auto flaky = [&]() -> ChatReply {
        if (++calls < 3) throw TransportError("down");
        return ChatReply{"ok", {}};
    };
    CHECK(with_retries(RetryPolicy{3, std::chrono::milliseconds(0)}, flaky).text == "ok");
    CHECK(calls == 3);
    calls = 0;
    CHECK_THROWS_AS(with_retries(RetryPolicy{1, std::chrono::milliseconds(0)}, flaky), TransportError);
    CHECK(calls == 2);
}

TEST_CASE("backend factory") {
    auto task = sample_task();
    task.ground_truth.tool_calls = {ToolCall{"get_price", {{"product_name", "zonin prosecco"}}}};
    auto oracle = make_backend_factory(Json{{"type", "oracle"}})(task);
    auto first = oracle->complete({}, Json::array()).text;
    CHECK(Json::parse(first) == Json::parse(R"([{"tool_name": "get_price", "parameters": {"product_name": "zonin prosecco"}}])"));
    auto scripted = make_backend_factory(Json{{"type", "scripted"}, {"playbook", {"id {user_id}"}}})(task);
    CHECK(scripted->complete({}, Json::array()).text == "id grace_liu_999");
    auto per_task = Json{{"type", "per_task"}, {"default", {{"type", "noop"}}}, {"tasks", {{"t1", {{"type", "echo"}}}}}};
    CHECK(make_backend_factory(per_task)(task)->model() == "echo");
    CHECK(backend_label(per_task, "t1") == "echo");
    CHECK(backend_label(per_task, "other") == "noop");
    CHECK_THROWS_AS(make_backend_factory(Json{{"type", "mystery"}}), ConfigError);
    CHECK_THROWS_AS(make_backend_factory(Json{{"type", "http"}, {"profile", {{"model", "m"}}}}), ConfigError);
}
