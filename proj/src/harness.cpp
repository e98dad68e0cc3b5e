#include "egoharness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/toolsets.hpp"

namespace egoharness {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path &base, const fs::path &p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

void write_file(const fs::path &path, const std::string &text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::string utc_stamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

const std::set<std::string> kConfigKeys{"scenario_pack", "tasks",    "modes",    "episode",
                                        "backends",      "output_dir", "run_name", "seed",
                                        "parallel",      "context_budget_chars", "prompts_dir", "noise_pools"};

} // namespace

RunConfig RunConfig::from_json(const Json &j, const fs::path &base_dir) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    for (const auto &[key, value] : j.items())
        if (!kConfigKeys.contains(key)) throw ConfigError("unknown run config key '" + key + "'");
    RunConfig c;
    c.base_dir = base_dir;
    try {
        c.scenario_pack = resolve(base_dir, j.at("scenario_pack").get<std::string>());
        for (const auto &t : j.value("tasks", std::vector<std::string>{})) c.tasks.push_back(resolve(base_dir, t));
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto &m : j.at("modes")) c.modes.push_back(mode_from_string(m.get<std::string>()));
        }
        if (j.contains("episode")) {
            const auto &e = j.at("episode");
            static const std::set<std::string> keys{"max_user_turns", "max_tool_calls", "max_inner_iterations",
                                                    "complaint_termination", "token_threshold"};
            for (const auto &[key, value] : e.items())
                if (!keys.contains(key)) throw ConfigError("unknown episode key '" + key + "'");
            c.episode.max_user_turns = e.value("max_user_turns", c.episode.max_user_turns);
            c.episode.max_tool_calls = e.value("max_tool_calls", c.episode.max_tool_calls);
            c.episode.max_inner_iterations = e.value("max_inner_iterations", c.episode.max_inner_iterations);
            c.episode.complaint_termination = e.value("complaint_termination", c.episode.complaint_termination);
            c.episode.execute.token_threshold = e.value("token_threshold", c.episode.execute.token_threshold);
        }
        const auto &b = j.at("backends");
        for (const auto &[key, value] : b.items())
            if (key != "agent" && key != "actor" && key != "evaluator" && key != "summarizer")
                throw ConfigError("unknown backend role '" + key + "'");
        c.backends.agent = b.at("agent");
        c.backends.actor = b.at("actor");
        if (b.contains("evaluator")) c.backends.evaluator = b.at("evaluator");
        if (b.contains("summarizer")) c.backends.summarizer = b.at("summarizer");
        if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        c.run_name = j.value("run_name", "");
        c.seed = j.value("seed", std::uint64_t{0});
        c.parallel = j.value("parallel", 4);
        if (j.contains("context_budget_chars") && !j.at("context_budget_chars").is_null())
            c.context_budget_chars = j.at("context_budget_chars").get<std::size_t>();
        if (j.contains("prompts_dir")) c.prompts_dir = resolve(base_dir, j.at("prompts_dir").get<std::string>());
        if (j.contains("noise_pools")) c.noise_pools = resolve(base_dir, j.at("noise_pools").get<std::string>());
    } catch (const Json::exception &e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config " + path.string());
    try {
        return from_json(Json::parse(in), path.parent_path());
    } catch (const Json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Json RunConfig::to_json() const {
    Json modes_json = Json::array();
    for (auto m : modes) modes_json.push_back(to_string(m));
    std::vector<std::string> task_paths;
    for (const auto &t : tasks) task_paths.push_back(t.string());
    Json j{{"scenario_pack", scenario_pack.string()},
           {"tasks", task_paths},
           {"modes", modes_json},
           {"episode",
            {{"max_user_turns", episode.max_user_turns},
             {"max_tool_calls", episode.max_tool_calls},
             {"max_inner_iterations", episode.max_inner_iterations},
             {"complaint_termination", episode.complaint_termination},
             {"token_threshold", episode.execute.token_threshold}}},
           {"backends",
            {{"agent", backends.agent},
             {"actor", backends.actor},
             {"evaluator", backends.evaluator},
             {"summarizer", backends.summarizer}}},
           {"output_dir", output_dir.string()},
           {"run_name", run_name},
           {"seed", seed},
           {"parallel", parallel},
           {"prompts_dir", prompts_dir.string()},
           {"noise_pools", noise_pools.string()}};
    if (context_budget_chars) j["context_budget_chars"] = *context_budget_chars;
    return j;
}

void RunConfig::validate() const {
    if (scenario_pack.empty()) throw ConfigError("scenario_pack is required");
    if (modes.empty()) throw ConfigError("at least one mode is required");
    if (parallel < 1) throw ConfigError("parallel must be at least 1");
    if (backends.agent.is_null() || backends.actor.is_null()) throw ConfigError("agent and actor backends are required");
    episode.validate();
}

namespace {

struct EpisodeJob {
    const TaskSpec *task;
    const Scenario *scenario;
    InteractionMode mode;
};

struct Backends {
    BackendFactory agent, actor, evaluator, summarizer;
};

Trajectory failed_trajectory(const TaskSpec &task, InteractionMode mode, const Scenario &scenario,
                             const std::string &model, const std::string &error) {
    Trajectory t;
    t.task_id = task.task_id;
    t.scenario_id = task.scenario_id;
    t.mode = mode;
    t.model = model;
    t.halted_reason = HaltReason::AgentError;
    t.error = error;
    t.final_digest = snapshot(scenario.pristine);
    return t;
}

/// Runs one episode in isolation; never throws.
Json run_one(const EpisodeJob &job, const RunConfig &config, const Backends &backends, const PromptSet &prompts,
             const NoisePools &noise, const std::string &gt_digest) {
    const auto &task = *job.task;
    Trajectory traj;
    Json extra = Json::object();
    try {
        auto agent_backend = backends.agent(task);
        auto actor = backends.actor(task);
        auto evaluator = backends.evaluator(task);
        auto summarizer = backends.summarizer(task);

        std::vector<std::string> pool;
        if (auto it = noise.find(job.scenario->kind); it != noise.end()) pool = it->second;
        UserSimulator user(task, job.mode, prompts, UserBackends{*actor, *evaluator, *summarizer}, pool,
                           config.seed);
        AgentAdapter agent(*agent_backend, job.scenario->registry.documents(),
                           AdapterConfig{config.context_budget_chars, task.image_description});
        ScenarioDatabase db = job.scenario->pristine;
        EpisodeConfig ep = config.episode;
        ep.mode = job.mode;
        traj = run_episode(task, agent, user, db, job.scenario->registry, ep, prompts);
        extra["truncated_payloads"] = agent.truncated_payloads();
        extra["degraded_media"] = agent.degraded_media();
        extra["actor_invocations"] = user.actor_invocations();
        extra["evaluator_invocations"] = user.evaluator_invocations();
    } catch (const std::exception &e) {
        traj = failed_trajectory(task, job.mode, *job.scenario, backend_label(config.backends.agent, task.task_id),
                                 e.what());
    }
    Json log = traj.to_log(task);
    log.update(extra);
    log["ground_truth"] = task.ground_truth.to_json();
    log["gt_replay_digest"] = gt_digest;
    return log;
}

} // namespace

RunSummary run(const RunConfig &config) {
    config.validate();
    auto pack = ScenarioPack::load(config.scenario_pack);
    std::vector<TaskSpec> tasks;
    auto task_files = config.tasks.empty() ? pack.task_files() : config.tasks;
    for (const auto &f : task_files) {
        auto loaded = load_tasks(f);
        tasks.insert(tasks.end(), std::make_move_iterator(loaded.begin()), std::make_move_iterator(loaded.end()));
    }
    std::set<std::string> ids;
    for (const auto &t : tasks) {
        if (!pack.contains(t.scenario_id))
            throw ConfigError("task " + t.task_id + " names unknown scenario '" + t.scenario_id + "'");
        if (!ids.insert(t.task_id).second) throw ConfigError("duplicate task id '" + t.task_id + "'");
    }
    auto prompts = PromptSet::load(config.prompts_dir);
    auto noise = load_noise_pools(config.noise_pools);
    Backends backends{make_backend_factory(config.backends.agent, config.base_dir),
                      make_backend_factory(config.backends.actor, config.base_dir),
                      make_backend_factory(config.backends.evaluator, config.base_dir),
                      make_backend_factory(config.backends.summarizer, config.base_dir)};

    RunSummary summary;
    summary.run_dir = config.output_dir / (config.run_name.empty() ? utc_stamp() : config.run_name);
    fs::create_directories(summary.run_dir);

    for (const auto &[id, scenario] : pack.scenarios())
        write_file(summary.run_dir / "toolsets" / (id + ".json"),
                   Json{{"scenario_id", id}, {"kind", scenario.kind}, {"tools", scenario.registry.documents()}}
                           .dump(2) +
                       "\n");

    Json failures = Json::array();
    std::map<std::string, std::string> gt_digests;
    std::vector<EpisodeJob> jobs;
    for (const auto &task : tasks) {
        const auto &scenario = pack.at(task.scenario_id);
        try {
            gt_digests[task.task_id] = replay_ground_truth(task.ground_truth, scenario.pristine, scenario.registry).digest;
        } catch (const GroundTruthInvalid &e) {
            spdlog::error("{}", e.what());
            failures.push_back({{"task_id", task.task_id}, {"mode", nullptr}, {"error", e.what()}});
            continue;
        }
        for (auto mode : config.modes) jobs.push_back({&task, &scenario, mode});
    }

    std::vector<Json> logs(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto &job = jobs[i];
            logs[i] = run_one(job, config, backends, prompts, noise, gt_digests.at(job.task->task_id));
            write_file(summary.run_dir / std::string(to_string(job.mode)) / (job.task->task_id + ".json"),
                       logs[i].dump(2) + "\n");
        }
    };
    {
        std::vector<std::jthread> pool;
        auto n = std::min<std::size_t>(static_cast<std::size_t>(config.parallel), std::max<std::size_t>(jobs.size(), 1));
        for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto &log = logs[i];
        if (log.at("halted_reason") == "AGENT_ERROR")
            failures.push_back({{"task_id", jobs[i].task->task_id},
                                {"mode", to_string(jobs[i].mode)},
                                {"error", log.at("error")}});
    }
    summary.episodes = jobs.size();
    summary.failures = failures.size();

    Json cfg = config.to_json();
    Json manifest{{"config", cfg},
                  {"config_hash", sha256_hex(canonical_json(cfg))},
                  {"episodes", summary.episodes},
                  {"task_count", tasks.size()},
                  {"failure_count", summary.failures},
                  {"failures", failures}};
    write_file(summary.run_dir / "manifest.json", manifest.dump(2) + "\n");

    try {
        write_report(summary.run_dir);
    } catch (const EmptyDataset &) {
        spdlog::warn("run {} produced no logs to report", summary.run_dir.string());
    }
    return summary;
}

Json EfficiencyStats::to_json() const {
    return Json{{"tasks", tasks},
                {"mean_input_tokens", mean_input_tokens},
                {"mean_output_tokens", mean_output_tokens},
                {"mean_rounds", mean_rounds},
                {"mean_tool_calls", mean_tool_calls}};
}

namespace {

struct LoadedLog {
    GroundTruth gt;
    Trajectory traj;
    std::string gt_digest;
};

struct GroupKey {
    std::string model;
    std::string scenario;
    std::string mode;
    auto operator<=>(const GroupKey &) const = default;
};

std::map<std::string, ToolRegistry> load_toolsets(const fs::path &dir) {
    std::map<std::string, ToolRegistry> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        try {
            std::ifstream in(entry.path());
            auto doc = Json::parse(in);
            auto id = doc.at("scenario_id").get<std::string>();
            out.emplace(id, registry_from_documents(doc.at("tools"), id));
        } catch (const std::exception &e) {
            spdlog::warn("skipping toolset {}: {}", entry.path().string(), e.what());
        }
    }
    return out;
}

std::string pct(double v) { return fmt::format("{:.1f}", v * 100.0); }

} // namespace

RunReport report(const fs::path &run_dir) {
    if (!fs::is_directory(run_dir)) throw ConfigError("not a run directory: " + run_dir.string());
    auto toolsets = load_toolsets(run_dir / "toolsets");

    RunReport out;
    std::vector<LoadedLog> logs;
    std::vector<std::string> skipped;
    for (auto mode : {InteractionMode::DynamicEasy, InteractionMode::DynamicHard, InteractionMode::Static}) {
        auto dir = run_dir / std::string(to_string(mode));
        if (!fs::is_directory(dir)) continue;
        std::vector<fs::path> files;
        for (const auto &entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto &f : files) {
            try {
                std::ifstream in(f);
                Json doc;
                try {
                    doc = Json::parse(in);
                } catch (const Json::parse_error &e) {
                    throw CorruptLog(e.what());
                }
                LoadedLog l;
                l.traj = Trajectory::from_log(doc);
                try {
                    l.gt = GroundTruth::from_json(doc.at("ground_truth"), l.traj.task_id);
                    l.gt_digest = doc.at("gt_replay_digest").get<std::string>();
                } catch (const std::exception &e) {
                    throw CorruptLog(e.what());
                }
                logs.push_back(std::move(l));
            } catch (const CorruptLog &e) {
                spdlog::warn("skipping corrupt log {}: {}", f.string(), e.what());
                skipped.push_back(fs::relative(f, run_dir).string());
            }
        }
    }
    out.logs = logs.size();
    out.corrupt_logs = skipped.size();
    if (logs.empty()) throw EmptyDataset();

    auto registry_for = [&](const std::string &scenario) -> const ToolRegistry * {
        auto it = toolsets.find(scenario);
        return it == toolsets.end() ? nullptr : &it->second;
    };

    std::map<GroupKey, std::vector<const LoadedLog *>> groups;
    std::set<std::string> modes_seen;
    for (const auto &l : logs) {
        std::string mode(to_string(l.traj.mode));
        modes_seen.insert(mode);
        for (const auto &model : {l.traj.model, std::string("ALL")})
            for (const auto &scenario : {l.traj.scenario_id, std::string("ALL")})
                groups[{model, scenario, mode}].push_back(&l);
    }

    Json groups_json = Json::array();
    std::map<GroupKey, MetricsReport> metrics;
    for (const auto &[key, members] : groups) {
        std::vector<TaskEvaluation> evals;
        std::map<std::string, int> histogram;
        for (const auto *l : members) {
            const auto *reg = registry_for(l->traj.scenario_id);
            evals.push_back({&l->gt, &l->traj, l->gt_digest, reg});
            bool result_correct = l->traj.final_digest.digest == l->gt_digest;
            ++histogram[std::string(to_string(classify_error(l->gt, l->traj, result_correct, reg).label))];
        }
        auto m = compute_metrics(evals);
        groups_json.push_back({{"model", key.model},
                               {"scenario_id", key.scenario},
                               {"mode", key.mode},
                               {"metrics", m.to_json()},
                               {"error_histogram", histogram}});
        metrics.emplace(key, std::move(m));
    }

    std::map<std::string, std::vector<const LoadedLog *>> by_model;
    for (const auto &l : logs) {
        by_model[l.traj.model].push_back(&l);
        by_model["ALL"].push_back(&l);
    }
    Json efficiency = Json::object();
    for (const auto &[model, members] : by_model) {
        EfficiencyStats s;
        s.tasks = members.size();
        for (const auto *l : members) {
            s.mean_input_tokens += static_cast<double>(l->traj.usage.input_tokens);
            s.mean_output_tokens += static_cast<double>(l->traj.usage.output_tokens);
            s.mean_rounds += l->traj.rounds_count;
            s.mean_tool_calls += static_cast<double>(l->traj.tool_calls_flat.size());
        }
        double n = static_cast<double>(s.tasks);
        s.mean_input_tokens /= n;
        s.mean_output_tokens /= n;
        s.mean_rounds /= n;
        s.mean_tool_calls /= n;
        efficiency[model] = s.to_json();
    }

    out.json = Json{{"groups", groups_json},
                    {"efficiency", efficiency},
                    {"log_count", out.logs},
                    {"corrupt_logs", out.corrupt_logs},
                    {"skipped", skipped}};

    std::vector<std::string> mode_order;
    for (auto m : {InteractionMode::DynamicEasy, InteractionMode::DynamicHard, InteractionMode::Static})
        if (modes_seen.contains(std::string(to_string(m)))) mode_order.emplace_back(to_string(m));

    std::set<std::pair<std::string, std::string>> rows;
    for (const auto &[key, m] : metrics) rows.insert({key.model, key.scenario});

    std::string text = fmt::format("{:<20} {:<14}", "model", "scenario");
    for (const auto &mode : mode_order) text += fmt::format(" | {:<6} {:>6} {:>6} {:>6} {:>6}", mode, "Micro", "Tool", "Result", "Joint");
    text += "\n";
    for (const auto &[model, scenario] : rows) {
        text += fmt::format("{:<20} {:<14}", model, scenario);
        for (const auto &mode : mode_order) {
            auto it = metrics.find({model, scenario, mode});
            if (it == metrics.end()) {
                text += fmt::format(" | {:<6} {:>6} {:>6} {:>6} {:>6}", "", "-", "-", "-", "-");
                continue;
            }
            const auto &m = it->second;
            text += fmt::format(" | {:<6} {:>6} {:>6} {:>6} {:>6}", "", pct(m.micro_acc), pct(m.tool_succ),
                                pct(m.result_succ), pct(m.joint_succ));
        }
        text += "\n";
    }
    text += "\nefficiency (means per task)\n";
    text += fmt::format("{:<20} {:>8} {:>12} {:>12} {:>8} {:>10}\n", "model", "tasks", "input_tok", "output_tok",
                        "rounds", "tool_calls");
    for (const auto &[model, s] : efficiency.items())
        text += fmt::format("{:<20} {:>8} {:>12.1f} {:>12.1f} {:>8.2f} {:>10.2f}\n", model,
                            s.at("tasks").get<std::size_t>(), s.at("mean_input_tokens").get<double>(),
                            s.at("mean_output_tokens").get<double>(), s.at("mean_rounds").get<double>(),
                            s.at("mean_tool_calls").get<double>());
    text += "\nerror classes\n";
    for (const auto &g : groups_json) {
        if (g.at("scenario_id") == "ALL" || g.at("model") == "ALL") continue;
        std::string line;
        for (const auto &[label, count] : g.at("error_histogram").items())
            line += fmt::format(" {}={}", label, count.get<int>());
        text += fmt::format("{:<20} {:<14} {:<6}{}\n", g.at("model").get<std::string>(),
                            g.at("scenario_id").get<std::string>(), g.at("mode").get<std::string>(), line);
    }
    if (out.corrupt_logs) text += fmt::format("\n{} corrupt log(s) skipped\n", out.corrupt_logs);
    out.text = std::move(text);
    return out;
}

RunReport write_report(const fs::path &run_dir) {
    auto r = report(run_dir);
    write_file(run_dir / "report.json", r.json.dump(2) + "\n");
    write_file(run_dir / "report.txt", r.text);
    return r;
}

} // namespace egoharness
