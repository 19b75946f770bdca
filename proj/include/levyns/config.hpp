#pragma once

#include <string>
#include <utility>
#include <vector>

#include "levyns/invariant.hpp"
#include "levyns/levy.hpp"
#include "levyns/solver.hpp"

// Run configuration: flat sectioned key-value text,
//
//   # comment
//   [solver]
//   dt = 1e-3
//   T = 1
//
// Sections: spectral, noise, solver, diagnostics, invariant. Keys are
// lowercase; values are numbers, enum words, comma-separated lists, or small
// colon-joined tuples (see the README grammar table). Unknown sections or
// keys, duplicate keys, and malformed values are all reported together with
// their line numbers — validation aggregates every violation instead of
// stopping at the first. The SHA-256 digest of the exact config bytes
// identifies the run in every artifact.

namespace levyns {

struct RunConfig {
    std::string text;  // raw bytes the digest covers
    std::string hash;  // SHA-256, lowercase hex

    SolverConfig solver;  // [spectral], [noise], [solver]

    // [diagnostics]
    std::vector<double> horizons{1.0, 2.0, 4.0, 8.0};
    int moment_trajectories = 256;
    int cf_mode = 1;
    std::vector<double> cf_xi{0.5, 1.0, 2.0};
    std::vector<std::pair<double, double>> cf_pairs{{0.0, 0.5}, {0.5, 1.0}};
    int cf_trajectories = 10000;

    // [invariant]
    double burn_in = -1.0;  // < 0: default T/2
    long long stride = 0;   // 0: adaptive
    int invariant_trajectories = 128;
    std::vector<Window> windows;            // empty: single window [burn_in, T]
    std::vector<ObservableSpec> observables{ObservableSpec{}};
};

struct ConfigResult {
    RunConfig config;
    std::vector<std::string> errors;    // aggregated; empty means valid
    std::vector<std::string> warnings;  // e.g. semi-implicit step-size threshold
    HThetaResult h_theta;               // evaluated whenever the noise section parses

    bool valid() const { return errors.empty(); }
};

ConfigResult load_run_config(const std::string& text);
ConfigResult load_run_config_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace levyns
