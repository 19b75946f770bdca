#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Provenance record written at the end of every CLI run: which config (by
// SHA-256), which tool version and seed, what was produced, and whether the
// run completed. Written atomically (temp file + rename) so a crashed run
// never leaves a truncated manifest; a run that fails after producing partial
// artifacts writes one with complete = false.
//
// Timestamps are wall-clock provenance and are deliberately excluded from any
// byte-identity contract; reproducibility is asserted on the data artifacts.

namespace levyns {

inline constexpr const char* kToolVersion = "levy-ns 0.1.0";

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string subcommand;
    std::string config_hash;  // empty when the operation takes no config
    std::uint64_t seed = 0;
    bool seed_overridden = false;
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;
    std::vector<std::string> outputs;  // files created by the run, relative to the manifest
    int trajectories = 0;
    int flagged = 0;
    bool complete = false;
    bool h_theta_finite = false;
    double h_theta = 0.0;
    std::map<std::string, double> summary;  // operation-specific scalars
};

void write_manifest_atomic(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

std::string utc_timestamp();

}  // namespace levyns
