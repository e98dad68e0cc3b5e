#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "egoharness/backends.hpp"
#include "egoharness/errors.hpp"
#include "egoharness/harness.hpp"
#include "egoharness/tool_engine.hpp"
#include "egoharness/toolsets.hpp"
#include "support.hpp"

using namespace egoharness;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string &what) {
        if (ok) return;
        if (pass) detail = what;
        pass = false;
    }
};

double money(double v) { return std::round(v * 100.0) / 100.0; }

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome tax_regression() {
    Outcome o;
    auto db = test::demo_db("retail");
    auto reg = retail_toolset();
    Json products = {{{"product_name", "bourgogne pinot noir"}, {"quantity", 2}},
                     {{"product_name", "cava gran reserva"}, {"quantity", 1}},
                     {{"product_name", "brisa prosecco"}, {"quantity", 2}},
                     {{"product_name", "chateau zind-humbrecht"}, {"quantity", 2}},
                     {{"product_name", "chateau languedoc"}, {"quantity", 1}}};
    ToolCall call{"compute_total_tax", {{"user_id", "bill_donk_143"}, {"products", products}}};
    execute(db, call, reg);
    double best = 1e9;
    ToolResult r;
    for (int i = 0; i < 5; ++i) {
        auto start = Clock::now();
        r = execute(db, call, reg);
        best = std::min(best, elapsed_ms(start));
    }
    o.require(r.status == ToolStatus::Success, "tax call failed: " + r.message);
    if (!o.pass) return o;
    const double expected[] = {14.45, 9.82, 15.26, 65.29, 8.00};
    for (std::size_t i = 0; i < 5; ++i) {
        double got = r.payload["details"][i]["tax_amount"].get<double>();
        o.require(std::abs(got - expected[i]) <= 0.01, fmt::format("line {} tax {} != {}", i, got, expected[i]));
    }
    double total = r.payload["total_tax"].get<double>();
    o.require(std::abs(total - 112.82) <= 0.01, fmt::format("total {} != 112.82", total));
    o.require(best < 1.0, fmt::format("took {:.3f} ms", best));
    return o;
}

Outcome payment_regression() {
    Outcome o;
    auto db = test::demo_db("retail");
    auto reg = retail_toolset();
    const auto *cadet = db.find_record(CatalogKind::Products, "mouton cadet");
    o.require(cadet && cadet->price == 90.0 && cadet->discount == 0.8, "mouton cadet fixture differs");
    auto r = execute(db,
                     ToolCall{"compute_total_payment",
                              {{"user_id", "alice_chen_204"},
                               {"products",
                                {{{"product_name", "mouton cadet"}, {"quantity", 1}},
                                 {{"product_name", "riunite"}, {"quantity", 1}}}}}},
                     reg);
    o.require(r.status == ToolStatus::PartialSuccess, "status is not partial success");
    o.require(r.payload.value("total", -1.0) == 72.0, "total is " + r.payload.value("total", Json()).dump());
    o.require(r.payload.value("status", "") == "partial_success", "payload status " + r.payload.value("status", ""));
    o.require(r.message.find("riunite") != std::string::npos, "message lacks the unresolved name: " + r.message);
    return o;
}

Outcome nutrition_regression() {
    Outcome o;
    auto db = test::demo_db("retail");
    auto reg = retail_toolset();
    auto total = [&](int qty) {
        return execute(db,
                       ToolCall{"compute_total_nutrition",
                                {{"user_id", "u"}, {"products", {{{"product_name", "riunite moscato"}, {"quantity", qty}}}}}},
                       reg)
            .payload.at("total_nutrition");
    };
    Json per100 = {{"serving_size_g", 100}, {"calories_kcal", 120}, {"protein_g", 0.5}, {"fat_g", 0},
                   {"carbs_g", 13},         {"sugar_g", 10},        {"sodium_mg", 5},   {"fiber_g", 0}};
    auto one = total(1), two = total(2);
    o.require(one.value("basis", "") == "TOTAL", "basis is not TOTAL");
    for (const auto &[k, v] : per100.items()) {
        o.require(one.at(k).get<double>() == v.get<double>(), fmt::format("x1 {} = {}", k, one.at(k).dump()));
        o.require(two.at(k).get<double>() == 2 * v.get<double>(), fmt::format("x2 {} = {}", k, two.at(k).dump()));
    }
    return o;
}

Outcome oracle_end_to_end() {
    Outcome o;
    auto pack = ScenarioPack::load(test::demo_pack());
    std::size_t records = 0, tasks = 0;
    for (const auto &[id, s] : pack.scenarios())
        for (const auto &[kind, recs] : s.pristine.catalog) records += recs.size();
    for (const auto &f : pack.task_files()) tasks += load_tasks(f).size();
    o.require(records >= 10, "pack has fewer than 10 catalog records");
    o.require(tasks >= 5, "pack has fewer than 5 tasks");

    auto cfg = RunConfig::load(test::data_dir() / "demo_pack" / "config_oracle.json");
    cfg.output_dir = test::scratch_dir("acceptance_oracle");
    cfg.run_name = "oracle";
    auto start = Clock::now();
    auto summary = run(cfg);
    auto rep = report(summary.run_dir);
    double ms = elapsed_ms(start);
    o.require(summary.failures == 0, "episode failures");
    for (const auto &g : rep.json.at("groups")) {
        if (g.at("model") != "ALL" || g.at("scenario_id") != "ALL") continue;
        for (auto key : {"ToolSucc", "MicroAcc", "ResultSucc", "JointSucc"})
            o.require(g.at("metrics").at(key).get<double>() == 1.0,
                      fmt::format("{} {} = {}", g.at("mode").get<std::string>(), key, g.at("metrics").at(key).dump()));
    }
    o.require(rep.logs == 3 * tasks, "missing logs");
    o.require(ms < 5000, fmt::format("took {:.0f} ms", ms));
    return o;
}

/// Executes `calls` on a copy of the pristine database the way an episode would.
Trajectory crafted(const std::vector<ToolCall> &calls, const ScenarioDatabase &pristine, const ToolRegistry &reg,
                   Json extra_emitted = Json::array()) {
    Trajectory t;
    t.task_id = "kitchen_001";
    t.emitted_calls = Json::array();
    auto db = pristine;
    for (const auto &c : calls) {
        t.emitted_calls.push_back(c.to_json());
        t.tool_calls_flat.push_back(c);
        execute(db, c, reg);
    }
    for (auto &e : extra_emitted) t.emitted_calls.push_back(e);
    t.final_digest = snapshot(db);
    return t;
}

Outcome error_cascade() {
    Outcome o;
    auto tasks = load_tasks(test::data_dir() / "demo_pack" / "tasks.json");
    auto it = std::find_if(tasks.begin(), tasks.end(), [](const TaskSpec &t) { return t.task_id == "kitchen_001"; });
    const auto &gt = it->ground_truth;
    auto pristine = test::demo_db("kitchen");
    auto reg = kitchen_toolset();
    auto gt_digest = replay_ground_truth(gt, pristine, reg);

    const auto &look = gt.tool_calls[0];
    const auto &menu = gt.tool_calls[1];
    const auto &shop = gt.tool_calls[2];
    auto menu_wrong_user = menu;
    menu_wrong_user.parameters["user_id"] = "cook_060";
    ToolCall look_potato{"get_ingredient_quantity", {{"ingredient_name", "potato"}}};
    ToolCall extra_write{"add_recipe_to_menu", {{"user_id", "cook_006"}, {"recipe_name", "tomato egg stir-fry"}}};
    Json broken = {{"tool_name", "add_recipe_to_menu"}, {"parameters", "cook_006"}};

    struct Case {
        const char *name;
        Trajectory traj;
        ErrorLabel expected;
    };
    std::vector<Case> cases{
        {"shape-broken call", crafted({look}, pristine, reg, Json::array({broken})), ErrorLabel::Structural},
        {"missed perception anchor", crafted({look_potato, menu, shop}, pristine, reg), ErrorLabel::Perception},
        {"wrong user_id", crafted({look, menu_wrong_user, shop}, pristine, reg), ErrorLabel::Hallucination},
        {"one missing gt call", crafted({look, menu}, pristine, reg), ErrorLabel::Logical},
        {"oracle plus extra write", crafted({look, menu, shop, extra_write}, pristine, reg), ErrorLabel::OverOperation},
        {"pure oracle", crafted({look, menu, shop}, pristine, reg), ErrorLabel::Correct},
        {"shape error and wrong user_id", crafted({look, menu_wrong_user, shop}, pristine, reg, Json::array({broken})),
         ErrorLabel::Structural},
    };
    for (const auto &c : cases) {
        bool result_correct = c.traj.final_digest == gt_digest;
        auto got = classify_error(gt, c.traj, result_correct, &reg).label;
        o.require(got == c.expected, fmt::format("{}: {} instead of {}", c.name, to_string(got), to_string(c.expected)));
    }
    return o;
}

/// Maximum bipartite matching by exhaustive search over agent subsets.
std::size_t exhaustive_matching(const std::vector<ToolCall> &gt, const std::vector<ToolCall> &agent) {
    std::vector<std::vector<int>> memo(gt.size() + 1, std::vector<int>(std::size_t{1} << agent.size(), -1));
    std::function<int(std::size_t, unsigned)> go = [&](std::size_t i, unsigned used) -> int {
        if (i == gt.size()) return 0;
        auto &m = memo[i][used];
        if (m >= 0) return m;
        int best = go(i + 1, used);
        for (std::size_t j = 0; j < agent.size(); ++j)
            if (!(used & (1u << j)) && calls_match(gt[i], agent[j]))
                best = std::max(best, 1 + go(i + 1, used | (1u << j)));
        return m = best;
    };
    return static_cast<std::size_t>(go(0, 0));
}

Outcome metric_equivalence() {
    Outcome o;
    std::mt19937_64 rng(2024);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto random_calls = [&] {
        std::vector<ToolCall> v(static_cast<std::size_t>(uni(0, 8)));
        for (auto &c : v) {
            c.tool_name = uni(0, 1) ? "get_price" : "add_to_cart";
            c.parameters = {{"product_name", std::string(1, static_cast<char>('a' + uni(0, 2)))}};
            if (uni(0, 1)) c.parameters["qty"] = uni(1, 2);
            if (uni(0, 3) == 0) c.parameters["user_id"] = uni(0, 1) ? "u" : "v";
        }
        return v;
    };
    for (int dataset = 0; dataset < 1000 && o.pass; ++dataset) {
        std::size_t n = static_cast<std::size_t>(uni(1, 6));
        std::vector<GroundTruth> gts(n);
        std::vector<Trajectory> trajs(n);
        std::vector<std::string> gt_digests(n);
        std::vector<TaskEvaluation> evals;
        for (std::size_t i = 0; i < n; ++i) {
            gts[i].tool_calls = random_calls();
            trajs[i].tool_calls_flat = random_calls();
            gt_digests[i] = uni(0, 1) ? "s" : "t";
            trajs[i].final_digest.digest = uni(0, 1) ? "s" : "t";
        }
        for (std::size_t i = 0; i < n; ++i) evals.push_back({&gts[i], &trajs[i], gt_digests[i], nullptr});
        auto m = compute_metrics(evals);

        double sum_m = 0, sum_g = 0, tool = 0, result = 0, joint = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto bf = exhaustive_matching(gts[i].tool_calls, trajs[i].tool_calls_flat);
            auto got = match_tool_calls(gts[i].tool_calls, trajs[i].tool_calls_flat).matched;
            o.require(got == bf, fmt::format("dataset {} task {}: matched {} vs exhaustive {}", dataset, i, got, bf));
            sum_m += static_cast<double>(bf);
            sum_g += static_cast<double>(gts[i].tool_calls.size());
            bool t = bf == gts[i].tool_calls.size();
            bool r = trajs[i].final_digest.digest == gt_digests[i];
            tool += t;
            result += r;
            joint += t && r;
        }
        double dn = static_cast<double>(n);
        double micro = sum_g == 0 ? 1.0 : sum_m / sum_g;
        o.require(std::abs(m.micro_acc - micro) < 1e-12, fmt::format("dataset {}: MicroAcc", dataset));
        o.require(std::abs(m.tool_succ - tool / dn) < 1e-12, fmt::format("dataset {}: ToolSucc", dataset));
        o.require(std::abs(m.result_succ - result / dn) < 1e-12, fmt::format("dataset {}: ResultSucc", dataset));
        o.require(std::abs(m.joint_succ - joint / dn) < 1e-12, fmt::format("dataset {}: JointSucc", dataset));
    }
    return o;
}

Outcome budget_enforcement() {
    Outcome o;
    auto prompts = PromptSet::load();
    auto pristine = test::demo_db("retail");
    auto registry = retail_toolset();
    auto task = load_tasks(test::data_dir() / "demo_pack" / "tasks.json").front();
    std::mt19937_64 rng(99);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const std::string read = R"({"tool_name": "get_price", "parameters": {"product_name": "zonin prosecco"}})";
    const std::string write =
        R"({"tool_name": "clear_cart", "parameters": {"user_id": "grace_liu_999"}})";

    auto adversary = [&](int max_batch) {
        return FunctionBackend(
            [&, max_batch](const auto &, const auto &) {
                int kind = uni(0, 9);
                if (kind == 0) return ChatReply{"Done.", {}};
                if (kind == 1) return ChatReply{"[]", {}};
                if (kind == 2) return ChatReply{"Sure: [" + read + "]", {}};
                std::string s = "[";
                int n = uni(1, max_batch);
                for (int i = 0; i < n; ++i) s += std::string(i ? "," : "") + (uni(0, 1) ? read : write);
                return ChatReply{s + "]", {}};
            },
            "adversary");
    };
    auto episode = [&](EpisodeConfig cfg, ChatBackend &agent_backend) {
        FunctionBackend actor(
            [&](const auto &, const auto &) {
                int k = uni(0, 9);
                return ChatReply{k == 0 ? "STOP" : k == 1 ? "Bad Service Agent! Hurry." : "Keep going.", {}};
            },
            "actor");
        ScriptedBackend evaluator({kAllPassEvaluation}, true);
        ScriptedBackend summarizer({"Summary."}, true);
        UserSimulator user(task, cfg.mode, prompts, {actor, evaluator, summarizer}, {"Hurry."}, 1);
        AgentAdapter agent(agent_backend, registry.documents(), {});
        ScenarioDatabase db = pristine;
        auto t = run_episode(task, agent, user, db, registry, cfg, prompts);
        auto back = Trajectory::from_log(Json::parse(t.to_log(task).dump()));
        return back;
    };
    const InteractionMode modes[] = {InteractionMode::DynamicEasy, InteractionMode::DynamicHard,
                                     InteractionMode::Static};
    for (int i = 0; i < 10000 && o.pass; ++i) {
        EpisodeConfig cfg;
        cfg.mode = modes[uni(0, 2)];
        cfg.max_user_turns = uni(1, 4);
        cfg.max_tool_calls = uni(1, 8);
        cfg.max_inner_iterations = uni(1, 5);
        cfg.complaint_termination = uni(0, 2);
        auto agent = adversary(6);
        auto t = episode(cfg, agent);
        o.require(t.tool_calls_flat.size() <= cfg.max_tool_calls,
                  fmt::format("episode {}: {} calls over a budget of {}", i, t.tool_calls_flat.size(), cfg.max_tool_calls));
        o.require(t.user_turns <= cfg.max_user_turns,
                  fmt::format("episode {}: {} turns over a budget of {}", i, t.user_turns, cfg.max_user_turns));
    }
    for (int i = 0; i < 20 && o.pass; ++i) {
        EpisodeConfig cfg;
        cfg.max_inner_iterations = 1000;
        auto agent = adversary(60);
        auto t = episode(cfg, agent);
        o.require(t.tool_calls_flat.size() <= 200, fmt::format("default budget: {} calls", t.tool_calls_flat.size()));
        o.require(t.user_turns <= 10, fmt::format("default budget: {} turns", t.user_turns));
    }
    return o;
}

Outcome determinism() {
    Outcome o;
    std::vector<fs::path> dirs;
    for (auto name : {"acceptance_det_a", "acceptance_det_b"}) {
        auto cfg = RunConfig::load(test::data_dir() / "demo_pack" / "config_mixed.json");
        cfg.output_dir = test::scratch_dir(name);
        cfg.run_name = "mixed";
        dirs.push_back(run(cfg).run_dir);
    }
    std::size_t compared = 0;
    for (auto mode : {"easy", "hard", "static"})
        for (const auto &e : fs::directory_iterator(dirs[0] / mode)) {
            o.require(slurp(e.path()) == slurp(dirs[1] / mode / e.path().filename()),
                      "log differs: " + e.path().filename().string());
            ++compared;
        }
    o.require(compared > 0, "no logs written");
    for (auto file : {"report.json", "report.txt"})
        o.require(slurp(dirs[0] / file) == slurp(dirs[1] / file), std::string(file) + " differs");
    return o;
}

/// Random scenario document with shuffled key and item order.
class RandomWorld {
  public:
    explicit RandomWorld(std::uint64_t seed) : rng_(seed) {
        int n = uni(3, 8);
        for (int i = 0; i < n; ++i)
            products_.push_back({{"name", fmt::format("product {}", i)},
                                 {"category", uni(0, 1) ? "wine" : "beer"},
                                 {"price", uni(1, 400)},
                                 {"tax_rate", uni(0, 20) / 100.0},
                                 {"discount", uni(5, 10) / 10.0},
                                 {"country_of_origin", uni(0, 1) ? "Italy" : "France"}});
        int users = uni(1, 3);
        for (int u = 0; u < users; ++u) {
            Json items = Json::array();
            for (int i = 0, k = uni(1, 4); i < k; ++i) {
                const auto &p = products_[static_cast<std::size_t>(uni(0, n - 1))];
                items.push_back({{"product_name", p["name"]},
                                 {"quantity", uni(1, 5)},
                                 {"category", p["category"]},
                                 {"price", p["price"]},
                                 {"tax_rate", p["tax_rate"]},
                                 {"discount", p["discount"]}});
            }
            carts_.push_back({{"user_id", fmt::format("user_{}", u)}, {"items", items}});
        }
    }

    std::string shuffled_text() { return shuffle(Json{{"products", products_}, {"user_carts", carts_}}); }

    /// Changes one scalar field somewhere in the document.
    std::string flipped_text() {
        auto products = products_;
        auto carts = carts_;
        if (uni(0, 1)) {
            auto &p = products[static_cast<std::size_t>(uni(0, static_cast<int>(products.size()) - 1))];
            const char *fields[] = {"category", "price", "tax_rate", "discount", "country_of_origin"};
            std::string f = fields[uni(0, 4)];
            if (p[f].is_string())
                p[f] = p[f].get<std::string>() + "x";
            else
                p[f] = p[f].get<double>() * 0.5 + (p[f].get<double>() == 0 ? 0.05 : 0);
        } else {
            auto &c = carts[static_cast<std::size_t>(uni(0, static_cast<int>(carts.size()) - 1))];
            auto &item = c["items"][static_cast<std::size_t>(uni(0, static_cast<int>(c["items"].size()) - 1))];
            item["quantity"] = item["quantity"].get<int>() + 1;
        }
        return shuffle(Json{{"products", products}, {"user_carts", carts}});
    }

  private:
    int uni(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::string shuffle(const Json &j) { return to_text(j); }

    std::string to_text(const Json &j) {
        if (j.is_object()) {
            std::vector<std::string> parts;
            for (const auto &[k, v] : j.items()) parts.push_back(Json(k).dump() + ":" + to_text(v));
            std::shuffle(parts.begin(), parts.end(), rng_);
            std::string s = "{";
            for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
            return s + "}";
        }
        if (j.is_array()) {
            std::vector<std::string> parts;
            for (const auto &v : j) parts.push_back(to_text(v));
            std::shuffle(parts.begin(), parts.end(), rng_);
            std::string s = "[";
            for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
            return s + "]";
        }
        return j.dump();
    }

    std::mt19937_64 rng_;
    Json products_ = Json::array();
    Json carts_ = Json::array();
};

std::string digest_of(const std::string &text) {
    return snapshot(parse_database(Json::parse(text), "retail")).digest;
}

Outcome digest_canonicalization() {
    Outcome o;
    for (std::uint64_t world = 0; world < 10 && o.pass; ++world) {
        RandomWorld w(world + 1);
        std::set<std::string> digests;
        for (int i = 0; i < 100; ++i) digests.insert(digest_of(w.shuffled_text()));
        o.require(digests.size() == 1, fmt::format("world {}: {} distinct digests", world, digests.size()));
        for (int i = 0; i < 100; ++i)
            o.require(digest_of(w.flipped_text()) != *digests.begin(), fmt::format("world {}: flip kept digest", world));
    }
    return o;
}

Outcome user_pipeline_contract() {
    Outcome o;
    auto prompts = PromptSet::load();
    auto task = load_tasks(test::data_dir() / "demo_pack" / "tasks.json").front();
    std::mt19937_64 rng(5);
    const std::string fail =
        R"({"scores": {"role_consistency": 1, "instruction_following": 0, "resilience": 1, "contextual_robustness": 1}, "suggestion": "Stay on the instruction."})";

    for (auto mode : {InteractionMode::DynamicEasy, InteractionMode::DynamicHard, InteractionMode::Static}) {
        int actor_calls = 0, evaluator_calls = 0;
        FunctionBackend actor([&](const auto &, const auto &) { ++actor_calls; return ChatReply{"I want wine.", {}}; },
                              "actor");
        FunctionBackend evaluator(
            [&](const auto &, const auto &) {
                ++evaluator_calls;
                return ChatReply{std::bernoulli_distribution(0.5)(rng) ? fail : kAllPassEvaluation, {}};
            },
            "evaluator");
        ScriptedBackend summarizer({"Summary."}, true);
        UserSimulator user(task, mode, prompts, {actor, evaluator, summarizer}, {"Quickly."}, 3);
        for (int turn = 0; turn < 500; ++turn) {
            int a0 = actor_calls, e0 = evaluator_calls;
            auto g = user.gate_user_turn("How can I help?");
            o.require(actor_calls - a0 <= 2 && g.actor_calls == actor_calls - a0,
                      fmt::format("{} actor calls in one turn", actor_calls - a0));
            o.require(evaluator_calls - e0 <= 2 && g.evaluator_calls == evaluator_calls - e0,
                      fmt::format("{} evaluator calls in one turn", evaluator_calls - e0));
        }
    }

    std::ifstream in(default_asset_dir() / "prompts" / "static_ending.txt");
    std::string ending;
    std::getline(in, ending);
    ScriptedBackend actor({"Please add one bottle of riunite moscato to my cart."}, true);
    ScriptedBackend evaluator({kAllPassEvaluation}, true);
    ScriptedBackend summarizer({"Summary."}, true);
    UserSimulator user(task, InteractionMode::Static, prompts, {actor, evaluator, summarizer});
    OracleAgent oracle(task.ground_truth.tool_calls);
    auto registry = retail_toolset();
    AgentAdapter agent(oracle, registry.documents(), {});
    auto db = test::demo_db("retail");
    EpisodeConfig cfg;
    cfg.mode = InteractionMode::Static;
    auto t = run_episode(task, agent, user, db, registry, cfg, prompts);
    std::size_t user_messages = 0;
    for (const auto &d : t.dialogue)
        if (d.role == "user") {
            ++user_messages;
            o.require(d.content.size() >= ending.size() &&
                          d.content.compare(d.content.size() - ending.size(), ending.size(), ending) == 0,
                      "static message does not end with the ending sentence");
        }
    o.require(user_messages == 1, fmt::format("static mode sent {} user messages", user_messages));
    return o;
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    struct Criterion {
        int id;
        const char *title;
        Outcome (*check)();
    };
    const Criterion criteria[] = {
        {1, "tax regression on the five-item cart", tax_regression},
        {2, "payment regression with an unresolved name", payment_regression},
        {3, "nutrition totals for one and two bottles", nutrition_regression},
        {4, "oracle agent scores 1.0 in every mode", oracle_end_to_end},
        {5, "error cascade fixtures", error_cascade},
        {6, "matching and metrics agree with naive recomputation", metric_equivalence},
        {7, "budgets hold under adversarial agents", budget_enforcement},
        {8, "identical runs are byte-identical", determinism},
        {9, "state digest ignores order and catches single flips", digest_canonicalization},
        {10, "simulated user invocation bounds and static ending", user_pipeline_contract},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        Outcome o;
        auto start = Clock::now();
        try {
            o = c.check();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << fmt::format("{} criterion {}: {} ({:.0f} ms){}", o.pass ? "PASS" : "FAIL", c.id, c.title,
                                 elapsed_ms(start), o.pass ? "" : " -- " + o.detail)
                  << std::endl;
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
