#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace egoharness {

std::filesystem::path default_asset_dir();

/// Replaces {name} for every known name and collapses {{ and }} to single
/// braces. Unknown {tokens} are left as they are.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string> &vars);

struct PromptSet {
    std::string user_easy;
    std::string user_hard;
    std::string user_static;
    std::string static_ending; // the closing sentence of a static request
    std::string service_agent;
    std::string evaluator;
    std::string summarizer;

    /// Reads <dir>/<name>.txt for each template. Throws ConfigError.
    static PromptSet load(const std::filesystem::path &dir = default_asset_dir() / "prompts");
};

} // namespace egoharness
