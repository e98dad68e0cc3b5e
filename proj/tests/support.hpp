#pragma once

#include <filesystem>
#include <string>

#include "egoharness/scenario_store.hpp"

namespace egoharness::test {

inline std::filesystem::path data_dir() { return EGOHARNESS_DATA_DIR; }
inline std::filesystem::path demo_pack() { return data_dir() / "demo_pack" / "pack.json"; }

inline ScenarioDatabase demo_db(const std::string &name) {
    return load_database(data_dir() / "demo_pack" / (name + ".json"));
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("egoharness_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace egoharness::test
