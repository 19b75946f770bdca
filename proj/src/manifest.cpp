#include "levyns/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace levyns {

namespace {
using nlohmann::json;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest_atomic(const std::string& path, const RunManifest& m) {
    json j;
    j["tool_version"] = m.tool_version;
    j["subcommand"] = m.subcommand;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["seed_overridden"] = m.seed_overridden;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = m.outputs;
    j["trajectories"] = m.trajectories;
    j["flagged"] = m.flagged;
    j["complete"] = m.complete;
    j["h_theta_finite"] = m.h_theta_finite;
    j["h_theta"] = m.h_theta;
    j["summary"] = m.summary;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("manifest: cannot open " + tmp + " for writing");
        os << j.dump(2) << "\n";
        os.flush();
        if (!os) throw std::runtime_error("manifest: write to " + tmp + " failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("manifest: rename to " + path + " failed");
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("manifest: cannot open " + path);
    json j;
    is >> j;
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.seed_overridden = j.at("seed_overridden").get<bool>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.trajectories = j.at("trajectories").get<int>();
    m.flagged = j.at("flagged").get<int>();
    m.complete = j.at("complete").get<bool>();
    m.h_theta_finite = j.at("h_theta_finite").get<bool>();
    m.h_theta = j.at("h_theta").get<double>();
    m.summary = j.at("summary").get<std::map<std::string, double>>();
    return m;
}

}  // namespace levyns
