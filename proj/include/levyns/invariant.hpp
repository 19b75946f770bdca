#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levyns/solver.hpp"
#include "levyns/stats.hpp"

// Krylov-Bogoliubov construction: time-and-ensemble averages of observable
// marginals approximate (1/T') int delta_{Phi(u_s)} ds, the empirical measures
// whose weak limits are invariant. Stationarity across time windows and
// sensitivity to the initial state are checked statistically; neither
// uniqueness nor ergodicity is asserted.

namespace levyns {

enum class ObservableKind { l2_norm, h1_theta, mode_coeff, f_theta_obs, energy_band };

struct ObservableSpec {
    ObservableKind kind = ObservableKind::l2_norm;
    int mode = 1;                 // mode_coeff, 1-based
    int band_lo = 1, band_hi = 1; // energy_band, 1-based inclusive

    std::string name() const;  // "l2", "h1theta", "mode:3", "ftheta", "band:2:5"
    static ObservableSpec parse(const std::string& token);  // inverse of name()
};

// l2: ||u||_0; h1theta: ||grad u||_0^theta; mode:j: a_j; ftheta: (||u||^2+1)^{theta/2};
// band:m1:m2: sum_{j=m1..m2} a_j^2
double evaluate_observable(const Basis& basis, const SpectralField& u,
                           const ObservableSpec& spec, double theta);

struct Window {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

struct ObservableMeasure {
    ObservableSpec spec;
    Window window;
    Histogram hist;  // mass + flows normalized to 1
    double mean = 0.0;
    double se = 0.0;  // across per-trajectory means when M > 1, else across samples
    long long samples = 0;
    bool underpowered = false;                // fewer than 100 effective samples
    std::vector<std::vector<double>> per_traj;  // samples per unflagged trajectory
};

struct EmpiricalMeasure {
    double burn_in = 0.0;
    long long stride = 1;  // steps between samples (resolved when adaptive)
    int trajectories = 0;
    int flagged = 0;
    std::vector<ObservableSpec> observables;
    std::vector<Window> windows;
    std::vector<std::vector<ObservableMeasure>> measures;  // [observable][window]
};

// Time-averaged empirical measures over [burn_in, T] split into `windows`
// (default: the single window [burn_in, T]). burn_in < 0 selects the default
// T/2; stride <= 0 selects the adaptive rule: the smallest lag in
// {10, 20, 40, ...} at which the pilot trajectory's post-burn-in l2 series has
// autocorrelation below 0.2 (a heuristic; no mixing rate is available).
// Histogram edges are fixed from the pilot: 64 bins over [0, 1.001 q99.5]
// (symmetric about 0 for signed observables) plus overflow. Flagged (blown-up)
// trajectories are excluded from every statistic and counted.
EmpiricalMeasure kb_estimate(const SolverConfig& cfg,
                             const std::vector<ObservableSpec>& observables,
                             double burn_in, long long stride, int m_trajectories,
                             std::vector<Window> windows = {}, int workers = 0);

struct StationarityResult {
    std::string observable;
    KsResult ks;
    bool underpowered = false;
};

struct StationarityReport {
    Window window_a, window_b;
    std::vector<StationarityResult> results;
    bool stationary = true;  // every well-powered observable passes at 1%
};

// Equality in law of two disjoint time windows, per observable. The
// permutation null swaps whole per-trajectory blocks so within-trajectory
// correlation cannot inflate the false-positive rate.
StationarityReport window_stationarity_test(const EmpiricalMeasure& m, std::size_t win_a,
                                            std::size_t win_b, int permutations,
                                            std::uint64_t seed);

struct SensitivityEntry {
    std::size_t config_a = 0, config_b = 0;
    std::string observable;
    double d = 0.0;  // KS distance between pooled samples
};

struct SensitivityReport {
    std::vector<SensitivityEntry> entries;  // all pairs, no verdict (ergodicity open)
};

// Pairwise KS distances between measures built from different initial states
// (window `window` of each). Reported without a verdict; run identical-state
// pairs alongside to set the Monte Carlo baseline.
SensitivityReport initial_condition_sensitivity(const std::vector<EmpiricalMeasure>& ms,
                                                std::size_t window = 0);

}  // namespace levyns
