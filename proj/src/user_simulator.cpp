#include "egoharness/user_simulator.hpp"

#include <fstream>
#include <regex>

#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

std::string_view to_string(InteractionMode mode) {
    switch (mode) {
    case InteractionMode::DynamicEasy: return "easy";
    case InteractionMode::DynamicHard: return "hard";
    case InteractionMode::Static: return "static";
    }
    return "?";
}

InteractionMode mode_from_string(std::string_view s) {
    if (s == "easy") return InteractionMode::DynamicEasy;
    if (s == "hard") return InteractionMode::DynamicHard;
    if (s == "static") return InteractionMode::Static;
    throw ConfigError("unknown interaction mode '" + std::string(s) + "'");
}

bool CriteriaScores::all_pass() const {
    return role_consistency == 1 && instruction_following == 1 && resilience == 1 && contextual_robustness == 1;
}

double CriteriaScores::average() const {
    return (role_consistency + instruction_following + resilience + contextual_robustness) / 4.0;
}

Json CriteriaScores::scores_json() const {
    return Json{{"role_consistency", role_consistency},
                {"instruction_following", instruction_following},
                {"resilience", resilience},
                {"contextual_robustness", contextual_robustness}};
}

CriteriaScores CriteriaScores::parse(std::string_view text) {
    auto open = text.find('{');
    auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw MalformedEvaluation("no JSON object in evaluator reply");
    Json doc;
    try {
        doc = Json::parse(text.substr(open, close - open + 1));
    } catch (const Json::parse_error &e) {
        throw MalformedEvaluation(e.what());
    }
    if (!doc.contains("scores") || !doc.at("scores").is_object()) throw MalformedEvaluation("missing 'scores'");
    const auto &s = doc.at("scores");
    auto binary = [&](const char *key) {
        if (!s.contains(key)) throw MalformedEvaluation(std::string("missing score '") + key + "'");
        const auto &v = s.at(key);
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
            throw MalformedEvaluation(std::string("score '") + key + "' is not 0 or 1");
        return v.get<int>();
    };
    CriteriaScores c;
    c.role_consistency = binary("role_consistency");
    c.instruction_following = binary("instruction_following");
    c.resilience = binary("resilience");
    c.contextual_robustness = binary("contextual_robustness");
    if (s.size() != 4) throw MalformedEvaluation("scores must have exactly four fields");
    if (!doc.contains("suggestion") || !doc.at("suggestion").is_string())
        throw MalformedEvaluation("missing 'suggestion'");
    c.suggestion = trim(doc.at("suggestion").get<std::string>());
    if (c.all_pass())
        c.suggestion.clear();
    else if (c.suggestion.empty())
        throw MalformedEvaluation("failing scores without a suggestion");
    return c;
}

Json GatedTurn::evaluation_json() const {
    return Json{{"scores", scores.scores_json()},
                {"suggestion", correction_applied ? first_suggestion : scores.suggestion},
                {"average_score", scores.average()},
                {"original_response", correction_applied ? Json(original_response) : Json()},
                {"correction_applied", correction_applied}};
}

NoisePools load_noise_pools(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open noise pools " + path.string());
    try {
        return Json::parse(in).get<NoisePools>();
    } catch (const Json::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string hard_mode_noise(const std::string &base, const std::vector<std::string> &pool, std::mt19937_64 &rng) {
    if (pool.empty()) return base;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return base + " " + pool[pick(rng)];
}

std::uint64_t episode_seed(std::uint64_t run_seed, std::string_view task_id) {
    // FNV-1a over the task id, mixed with the run seed by a splitmix64 finalizer.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : task_id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = run_seed ^ h;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

bool is_stop(std::string_view message) {
    static const std::regex token(R"((^|[^A-Za-z0-9_])STOP([^A-Za-z0-9_]|$))");
    auto t = trim(message);
    return t == "STOP" || std::regex_search(t, token);
}

bool is_complaint(std::string_view message) { return trim(message).rfind("Bad Service Agent", 0) == 0; }

UserSimulator::UserSimulator(const TaskSpec &task, InteractionMode mode, const PromptSet &prompts,
                             UserBackends backends, std::vector<std::string> noise_pool, std::uint64_t seed)
    : task_(task), prompts_(prompts), backends_(backends), noise_pool_(std::move(noise_pool)),
      rng_(episode_seed(seed, task.task_id)) {
    state_.mode = mode;
}

std::string UserSimulator::actor_prompt(const std::string &agent_reply) const {
    if (state_.mode == InteractionMode::Static)
        return render_template(prompts_.user_static, {{"user_instruction", task_.instruction},
                                                      {"image_description", task_.image_description}});
    const auto &tmpl = state_.mode == InteractionMode::DynamicHard ? prompts_.user_hard : prompts_.user_easy;
    return render_template(tmpl, {{"user_instruction", task_.instruction},
                                  {"image_description", task_.image_description},
                                  {"original_user_response", state_.original_response.value_or("")},
                                  {"evaluation_feedback", state_.feedback.value_or("")},
                                  {"history_summary", state_.summary},
                                  {"service_agent_response", agent_reply}});
}

std::string UserSimulator::actor_respond(const std::string &agent_reply) {
    ++actor_calls_;
    std::vector<ChatMessage> msgs{{Role::System, actor_prompt(agent_reply), {}}, {Role::User, agent_reply, {}}};
    return trim(backends_.actor.complete(msgs, Json::array()).text);
}

CriteriaScores UserSimulator::evaluate_response(const std::string &user_message, const std::string &agent_message) {
    std::string input = "[User Original Instruction]\n" + task_.instruction + "\n\n[Interaction process]\n" +
                        state_.summary + "\n\n[Service Agent Response]\n" + agent_message +
                        "\n\n[Simulated User Response]\n" + user_message;
    std::vector<ChatMessage> msgs{{Role::System, prompts_.evaluator, {}}, {Role::User, input, {}}};
    ++evaluator_calls_;
    auto first = backends_.evaluator.complete(msgs, Json::array()).text;
    try {
        return CriteriaScores::parse(first);
    } catch (const MalformedEvaluation &e) {
        spdlog::warn("task {}: {}; asking the evaluator once more", task_.task_id, e.what());
    }
    return CriteriaScores::parse(backends_.evaluator.complete(msgs, Json::array()).text);
}

GatedTurn UserSimulator::gate_user_turn(const std::string &agent_reply) {
    GatedTurn turn;
    auto actor_before = actor_calls_;
    auto eval_before = evaluator_calls_;

    auto u = actor_respond(agent_reply);
    auto scores = evaluate_response(u, agent_reply);
    if (!scores.all_pass()) {
        state_.feedback = scores.suggestion;
        state_.original_response = u;
        turn.correction_applied = true;
        turn.original_response = u;
        turn.first_suggestion = scores.suggestion;
        u = actor_respond(agent_reply);
        scores = evaluate_response(u, agent_reply);
    } else {
        state_.feedback.reset();
        state_.original_response.reset();
    }

    if (state_.mode == InteractionMode::Static) {
        const auto &ending = prompts_.static_ending;
        if (u.size() < ending.size() || u.compare(u.size() - ending.size(), ending.size(), ending) != 0)
            u += (u.empty() ? "" : " ") + ending;
    } else if (state_.mode == InteractionMode::DynamicHard) {
        u = hard_mode_noise(u, noise_pool_, rng_);
    }
    turn.text = std::move(u);
    turn.scores = std::move(scores);
    turn.actor_calls = static_cast<int>(actor_calls_ - actor_before);
    turn.evaluator_calls = static_cast<int>(evaluator_calls_ - eval_before);
    return turn;
}

std::string UserSimulator::summarize_turn(const std::string &agent_reply, const std::string &user_message) {
    auto prompt = render_template(prompts_.summarizer, {{"user_instruction", task_.instruction},
                                                        {"previous_summary", state_.summary},
                                                        {"agent_response", agent_reply},
                                                        {"user_response", user_message}});
    std::vector<ChatMessage> msgs{{Role::User, prompt, {}}};
    auto summary = trim(backends_.summarizer.complete(msgs, Json::array()).text);
    if (count_sentences(summary) > 3)
        spdlog::warn("task {}: summary has {} sentences (contract: at most 3)", task_.task_id, count_sentences(summary));
    state_.summary = summary;
    return summary;
}

} // namespace egoharness
