#pragma once

#include <filesystem>
#include <optional>

#include "egoharness/backends.hpp"
#include "egoharness/metrics.hpp"

namespace egoharness {

struct BackendSpecs {
    Json agent;
    Json actor;
    Json evaluator = Json{{"type", "all_pass"}};
    Json summarizer = Json{{"type", "scripted"},
                           {"playbook", {"The user asked for help and the agent replied."}},
                           {"cycle", true}};
};

struct RunConfig {
    std::filesystem::path scenario_pack;
    std::vector<std::filesystem::path> tasks; // empty: the pack's own task files
    std::vector<InteractionMode> modes{InteractionMode::DynamicEasy, InteractionMode::DynamicHard,
                                       InteractionMode::Static};
    EpisodeConfig episode;
    BackendSpecs backends;
    std::filesystem::path output_dir = "runs";
    std::string run_name; // empty: UTC timestamp
    std::uint64_t seed = 0;
    int parallel = 4;
    std::optional<std::size_t> context_budget_chars;
    std::filesystem::path prompts_dir = default_asset_dir() / "prompts";
    std::filesystem::path noise_pools = default_asset_dir() / "noise_pools.json";
    std::filesystem::path base_dir; // relative paths in the config resolve here

    /// Throws ConfigError on unknown keys or bad values.
    static RunConfig from_json(const Json &j, const std::filesystem::path &base_dir = {});
    static RunConfig load(const std::filesystem::path &path);
    Json to_json() const;
    void validate() const;
};

struct RunSummary {
    std::filesystem::path run_dir;
    std::size_t episodes = 0;
    std::size_t failures = 0;
};

/// Runs every (task, mode) episode and writes logs, toolsets, the manifest
/// and the report under <output_dir>/<run_name>.
RunSummary run(const RunConfig &config);

struct EfficiencyStats {
    std::size_t tasks = 0;
    double mean_input_tokens = 0;
    double mean_output_tokens = 0;
    double mean_rounds = 0;
    double mean_tool_calls = 0;

    Json to_json() const;
};

struct RunReport {
    Json json;
    std::string text;
    std::size_t logs = 0;
    std::size_t corrupt_logs = 0;
};

/// Aggregates the logs of a run directory. Throws EmptyDataset when no log
/// parses.
RunReport report(const std::filesystem::path &run_dir);

/// Writes report.json and report.txt next to the logs.
RunReport write_report(const std::filesystem::path &run_dir);

} // namespace egoharness
