#include "egoharness/prompts.hpp"

#include <fstream>
#include <sstream>

#include "egoharness/errors.hpp"
#include "egoharness/normalize.hpp"

namespace egoharness {

std::filesystem::path default_asset_dir() { return EGOHARNESS_ASSET_DIR; }

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string> &vars) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        char c = tmpl[i];
        if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
            out.push_back(c);
            ++i;
            continue;
        }
        if (c == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != vars.end()) {
                    out += it->second;
                    i = close;
                    continue;
                }
            }
        }
        out.push_back(c);
    }
    return out;
}

namespace {

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing prompt asset " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

PromptSet PromptSet::load(const std::filesystem::path &dir) {
    PromptSet p;
    p.user_easy = read_text(dir / "user_easy.txt");
    p.user_hard = read_text(dir / "user_hard.txt");
    p.user_static = read_text(dir / "user_static.txt");
    p.static_ending = trim(read_text(dir / "static_ending.txt"));
    p.service_agent = read_text(dir / "service_agent.txt");
    p.evaluator = read_text(dir / "evaluator.txt");
    p.summarizer = read_text(dir / "summarizer.txt");
    return p;
}

} // namespace egoharness
