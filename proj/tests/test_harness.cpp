#include <fstream>
#include <sstream>

#include <doctest.h>

#include "egoharness/errors.hpp"
#include "egoharness/harness.hpp"
#include "support.hpp"

using namespace egoharness;
namespace fs = std::filesystem;

namespace {

RunConfig demo_config(const std::string &name, const fs::path &out) {
    auto cfg = RunConfig::load(test::data_dir() / "demo_pack" / ("config_" + name + ".json"));
    cfg.output_dir = out;
    cfg.run_name = name;
    return cfg;
}

const Json &find_group(const Json &report, const std::string &model, const std::string &scenario,
                       const std::string &mode) {
    for (const auto &g : report.at("groups"))
        if (g.at("model") == model && g.at("scenario_id") == scenario && g.at("mode") == mode) return g;
    throw std::runtime_error("group not found");
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("oracle run writes logs, toolsets and a perfect report") {
    auto out = test::scratch_dir("harness_oracle");
    auto summary = run(demo_config("oracle", out));
    CHECK(summary.failures == 0);
    CHECK(summary.episodes == 18);
    for (auto mode : {"easy", "hard", "static"}) CHECK(fs::exists(summary.run_dir / mode / "retail_001.json"));
    CHECK(fs::exists(summary.run_dir / "toolsets" / "retail.json"));
    auto manifest = Json::parse(slurp(summary.run_dir / "manifest.json"));
    CHECK(manifest.at("config_hash").get<std::string>().size() == 64);
    CHECK(manifest.at("failure_count") == 0);

    auto rep = report(summary.run_dir);
    CHECK(rep.logs == 18);
    for (auto mode : {"easy", "hard", "static"}) {
        auto m = find_group(rep.json, "ALL", "ALL", mode).at("metrics");
        CHECK(m.at("JointSucc").get<double>() == 1.0);
        CHECK(m.at("MicroAcc").get<double>() == 1.0);
    }
    CHECK(fs::exists(summary.run_dir / "report.txt"));
}

TEST_CASE("mixed run aggregates to half") {
    auto out = test::scratch_dir("harness_mixed");
    auto summary = run(demo_config("mixed", out));
    auto rep = report(summary.run_dir);
    for (auto mode : {"easy", "hard", "static"}) {
        const auto &g = find_group(rep.json, "ALL", "ALL", mode);
        CHECK(g.at("metrics").at("JointSucc").get<double>() == doctest::Approx(0.5));
        CHECK(g.at("error_histogram").at("CORRECT") == 3);
    }
    CHECK(rep.text.find("50.0") != std::string::npos);
}

TEST_CASE("unreachable http backend is recorded as an agent error") {
    auto out = test::scratch_dir("harness_http");
    auto cfg = demo_config("oracle", out);
    cfg.modes = {InteractionMode::DynamicEasy};
    cfg.backends.agent = Json{{"type", "http"},
                              {"profile",
                               {{"base_url", "http://127.0.0.1:1"},
                                {"model", "offline"},
                                {"retries", 1},
                                {"backoff_ms", 1},
                                {"timeout_s", 0.5}}}};
    auto summary = run(cfg);
    auto log = Json::parse(slurp(summary.run_dir / "easy" / "retail_001.json"));
    CHECK(log.at("halted_reason") == "AGENT_ERROR");
    CHECK(log.at("model") == "offline");
    auto rep = report(summary.run_dir);
    CHECK(find_group(rep.json, "ALL", "ALL", "easy").at("metrics").at("JointSucc").get<double>() == 0.0);
}

TEST_CASE("identical configs give byte-identical logs") {
    auto a = run(demo_config("mixed", test::scratch_dir("harness_det_a")));
    auto b = run(demo_config("mixed", test::scratch_dir("harness_det_b")));
    std::size_t compared = 0;
    for (auto mode : {"easy", "hard", "static"})
        for (const auto &e : fs::directory_iterator(a.run_dir / mode)) {
            CHECK(slurp(e.path()) == slurp(b.run_dir / mode / e.path().filename()));
            ++compared;
        }
    CHECK(compared == 18);
    CHECK(slurp(a.run_dir / "report.json") == slurp(b.run_dir / "report.json"));
}

TEST_CASE("report edge cases") {
    auto empty = test::scratch_dir("harness_empty");
    CHECK_THROWS_AS(report(empty), EmptyDataset);

    auto summary = run(demo_config("oracle", test::scratch_dir("harness_corrupt")));
    std::ofstream(summary.run_dir / "easy" / "zz_broken.json") << "{ not json";
    auto log = Json::parse(slurp(summary.run_dir / "hard" / "retail_001.json"));
    log["tool_calls_count"] = 999;
    std::ofstream(summary.run_dir / "hard" / "retail_001.json") << log.dump();
    auto rep = report(summary.run_dir);
    CHECK(rep.corrupt_logs == 2);
    CHECK(rep.logs == 17);
}

TEST_CASE("config validation") {
    Json j = {{"scenario_pack", "pack.json"},
              {"backends", {{"agent", {{"type", "noop"}}}, {"actor", {{"type", "noop"}}}}},
              {"temperature", 0.3}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j.erase("temperature");
    CHECK_NOTHROW(RunConfig::from_json(j));
    j["context_budget_chars"] = nullptr;
    CHECK_FALSE(RunConfig::from_json(j).context_budget_chars);
    j["modes"] = {"medium"};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j["modes"] = {"easy"};
    j["episode"] = {{"max_user_turns", 0}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
}
