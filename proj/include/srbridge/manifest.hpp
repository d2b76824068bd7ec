#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "srbridge/errors.hpp"

namespace srb {

inline constexpr const char* srbridge_version = "srbridge 0.1.0";

// Record of one CLI run; re-running with the stored config and seed must
// reproduce the listed data outputs byte for byte.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::string version = srbridge_version;
    std::vector<std::string> outputs;
    double wall_clock_s = 0.0;
};

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    j["schema"] = "srbridge-manifest.v1";
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    j["wall_clock_s"] = m.wall_clock_s;
    write_atomic(path, j.dump(1) + "\n");
}

}  // namespace srb
