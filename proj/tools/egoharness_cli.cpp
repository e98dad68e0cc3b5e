#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "egoharness/errors.hpp"
#include "egoharness/harness.hpp"
#include "egoharness/toolsets.hpp"

namespace fs = std::filesystem;
using namespace egoharness;

namespace {

int cmd_run(const fs::path &config_path, const std::vector<std::string> &modes, std::optional<std::uint64_t> seed,
            std::optional<int> parallel, const std::string &run_name, const std::string &output_dir) {
    auto config = RunConfig::load(config_path);
    if (!modes.empty()) {
        config.modes.clear();
        for (const auto &m : modes) config.modes.push_back(mode_from_string(m));
    }
    if (seed) config.seed = *seed;
    if (parallel) config.parallel = *parallel;
    if (!run_name.empty()) config.run_name = run_name;
    if (!output_dir.empty()) config.output_dir = output_dir;
    config.validate();

    auto summary = run(config);
    std::cout << "run directory: " << summary.run_dir.string() << "\n"
              << "episodes: " << summary.episodes << ", failures: " << summary.failures << "\n";
    if (fs::exists(summary.run_dir / "report.txt")) {
        std::ifstream in(summary.run_dir / "report.txt");
        std::cout << "\n" << in.rdbuf();
    }
    return 0;
}

int cmd_report(const fs::path &run_dir, bool as_json) {
    auto r = write_report(run_dir);
    if (as_json)
        std::cout << r.json.dump(2) << "\n";
    else
        std::cout << r.text;
    return 0;
}

int cmd_validate(const fs::path &path, const std::string &kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    auto doc = Json::parse(in);
    int problems = 0;
    if (doc.contains("scenarios")) {
        auto pack = ScenarioPack::load(path);
        for (const auto &[id, s] : pack.scenarios()) {
            std::size_t records = 0;
            for (const auto &[kind, recs] : s.pristine.catalog) records += recs.size();
            std::cout << id << " (" << s.kind << "): " << records << " catalog records, digest "
                      << snapshot(s.pristine).digest << "\n";
            for (const auto &d : s.report.dangling) std::cout << "  dangling reference " << d << "\n";
        }
        for (const auto &f : pack.task_files())
            for (const auto &task : load_tasks(f)) {
                const auto &s = pack.at(task.scenario_id);
                try {
                    replay_ground_truth(task.ground_truth, s.pristine, s.registry);
                } catch (const GroundTruthInvalid &e) {
                    std::cout << "  " << e.what() << "\n";
                    ++problems;
                }
            }
    } else {
        LoadReport report;
        auto db = load_database(path, &report);
        validate_database(db);
        if (!kind.empty()) toolset_for(kind);
        std::cout << path.string() << ": ok, digest " << snapshot(db).digest << "\n";
        for (const auto &d : report.dangling) std::cout << "  dangling reference " << d << "\n";
    }
    std::cout << (problems ? "invalid" : "valid") << "\n";
    return problems ? 1 : 0;
}

int cmd_replay(const fs::path &task_file, fs::path pack_path) {
    if (pack_path.empty()) pack_path = task_file.parent_path() / "pack.json";
    auto pack = ScenarioPack::load(pack_path);
    int failures = 0;
    for (const auto &task : load_tasks(task_file)) {
        if (!pack.contains(task.scenario_id)) {
            std::cout << task.task_id << ": unknown scenario " << task.scenario_id << "\n";
            ++failures;
            continue;
        }
        const auto &s = pack.at(task.scenario_id);
        try {
            auto digest = replay_ground_truth(task.ground_truth, s.pristine, s.registry);
            std::cout << task.task_id << ": " << task.ground_truth.tool_calls.size() << " call(s), digest "
                      << digest.digest << "\n";
        } catch (const GroundTruthInvalid &e) {
            std::cout << e.what() << "\n";
            ++failures;
        }
    }
    return failures ? 1 : 0;
}

int cmd_export(const std::string &kind, const fs::path &out) {
    auto text = toolset_for(kind).documents().dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(out);
        if (!file) throw ConfigError("cannot write " + out.string());
        file << text;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Evaluation harness for stateful tool-using agents"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    fs::path config_path;
    std::vector<std::string> modes;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallel;
    std::string run_name, output_dir;
    auto *run_cmd = app.add_subcommand("run", "run episodes and write logs plus a report");
    run_cmd->add_option("--config", config_path, "run config (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--mode", modes, "easy, hard or static; repeatable")
        ->check(CLI::IsMember({"easy", "hard", "static"}));
    run_cmd->add_option("--seed", seed, "run seed");
    run_cmd->add_option("--parallel", parallel, "episodes in flight")->check(CLI::PositiveNumber);
    run_cmd->add_option("--run-name", run_name, "run directory name (default: UTC timestamp)");
    run_cmd->add_option("--output-dir", output_dir, "parent of the run directory");

    fs::path run_dir;
    bool as_json = false;
    auto *report_cmd = app.add_subcommand("report", "aggregate the logs of a run directory");
    report_cmd->add_option("run_dir", run_dir)->required()->check(CLI::ExistingDirectory);
    report_cmd->add_flag("--json", as_json, "print JSON instead of the table");

    fs::path scenario_path;
    std::string kind;
    auto *validate_cmd = app.add_subcommand("validate-scenario", "check a scenario database or a scenario pack");
    validate_cmd->add_option("path", scenario_path)->required()->check(CLI::ExistingFile);
    validate_cmd->add_option("--kind", kind, "toolset the database is meant for");

    fs::path task_file, pack_path;
    auto *replay_cmd = app.add_subcommand("replay-gt", "replay ground-truth calls and print final digests");
    replay_cmd->add_option("task_file", task_file)->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--pack", pack_path, "pack manifest (default: pack.json next to the task file)");

    std::string export_kind;
    fs::path export_out;
    auto *export_cmd = app.add_subcommand("export-toolset", "print the function schemas of a built-in toolset");
    export_cmd->add_option("kind", export_kind)->required()->check(CLI::IsMember(builtin_toolset_names()));
    export_cmd->add_option("-o,--out", export_out, "output file");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*run_cmd) return cmd_run(config_path, modes, seed, parallel, run_name, output_dir);
        if (*report_cmd) return cmd_report(run_dir, as_json);
        if (*validate_cmd) return cmd_validate(scenario_path, kind);
        if (*replay_cmd) return cmd_replay(task_file, pack_path);
        if (*export_cmd) return cmd_export(export_kind, export_out);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
