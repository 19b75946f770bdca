#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levyns/levy.hpp"
#include "levyns/nonlinear.hpp"
#include "levyns/spectral.hpp"

// Time stepping for the Galerkin system
//   da_j = (-lambda_j a_j - B_j(u)) dt + dL_j,   B_j(u) = <(u.grad)u, e_j>_0,
// with the jump increment applied at step end (cadlag convention: the drift
// runs on [t, t+dt) and the state jumps at t+dt).

namespace levyns {

enum class Scheme { exponential_euler, semi_implicit_euler };

struct InitialCondition {
    enum class Kind { zero, single_mode, random_sobolev, explicit_field };
    Kind kind = Kind::zero;

    // single_mode
    WaveVector wave{0, 1};
    Phase phase = Phase::cosine;
    double amplitude = 1.0;

    // random_sobolev: a_j proportional to lambda_j^{-gamma/2} gaussians,
    // rescaled so the L2 norm equals `l2_norm`
    double sobolev_gamma = 2.0;
    double l2_norm = 1.0;

    // explicit_field (e.g. a re-ingested snapshot); projected onto the run basis
    SpectralField field;

    static InitialCondition zero() { return {}; }
    static InitialCondition single_mode(WaveVector k, Phase p, double amp);
    static InitialCondition random_sobolev(double gamma, double norm);
    static InitialCondition from_field(SpectralField f);
};

// deterministic given (master_seed); ensembles share one initial state
SpectralField build_initial(const Basis& basis, const InitialCondition& ic,
                            std::uint64_t master_seed);

struct SolverConfig {
    int n = 8;
    double dt = 1e-3;
    double horizon = 1.0;  // T; must be 0 or an integer multiple of dt
    InitialCondition initial;
    bool noise_off = false;
    LevyNoiseSpec noise;
    NoiseSettings noise_settings;
    Scheme scheme = Scheme::exponential_euler;
    std::uint64_t seed = 0;
    long long snapshot_stride = 0;  // 0: snapshots only at t = 0 and t = T
    NonlinearBackend nonlinear = NonlinearBackend::serial;
};

// aggregated up front so a config report can name every violation at once
std::vector<std::string> validate_config(const SolverConfig& cfg);

struct BlowUpError : std::runtime_error {
    long long step_index;
    double time;
    BlowUpError(long long s, double t);
};

struct StepScalars {
    double t = 0.0;
    double l2_norm = 0.0;
    double h1_norm = 0.0;
    double f_theta = 0.0;
    int big_jumps = 0;  // jumps logged by the levy-ito backend at this step
};

struct Snapshot {
    double t = 0.0;
    SpectralField field;
};

struct TrajectoryRecord {
    std::uint64_t traj = 0;
    std::vector<StepScalars> scalars;  // every grid time, starting at t = 0
    std::vector<Snapshot> snapshots;   // t = 0, every snapshot_stride steps, t = T
    std::vector<std::pair<double, BigJump>> jump_log;  // (step-end time, jump)
};

// advance one step; `out_drifted`, when given, receives the left limit at
// t + dt (drift applied, jump not yet added)
SpectralField step(const Basis& basis, const SpectralField& u, double dt,
                   const NoiseIncrement& dl, Scheme scheme,
                   NonlinearBackend backend = NonlinearBackend::serial,
                   SpectralField* out_drifted = nullptr);

// per-step view for diagnostics that need the cadlag left limit
struct StepView {
    long long step = 0;  // 1-based completed step
    double t0 = 0.0, t1 = 0.0;
    const SpectralField& before;   // u(t0)
    const SpectralField& drifted;  // left limit u(t1-)
    const SpectralField& after;    // u(t1)
    const NoiseIncrement& increment;
};
using StepCallback = std::function<void(const StepView&)>;

TrajectoryRecord simulate(const SolverConfig& cfg, std::uint64_t traj = 0,
                          const StepCallback& cb = {});

struct TrajectorySummary {
    std::uint64_t traj = 0;
    bool flagged = false;  // blow-up; accumulators stop at the last finite state
    long long blow_up_step = -1;
    long long big_jump_count = 0;
    // prefix statistics at each requested horizon:
    //   sup_at:      sup_{s<=t} ||u_s||_0^theta   (grid sup, includes t=0)
    //   integral_at: trapezoid of ||grad u||_0^2 / (||u||_0^2+1)^{1-theta/2}
    //   grad_theta_at: trapezoid of ||grad u||_0^theta
    std::vector<double> sup_at;
    std::vector<double> integral_at;
    std::vector<double> grad_theta_at;
};

struct EnsembleResult {
    std::vector<double> horizons;
    std::vector<TrajectorySummary> summaries;  // ordered by trajectory index
    int flagged = 0;
};

// M independent trajectories on disjoint rng streams; `horizons` empty means
// {cfg.horizon}; horizons must be grid-aligned and nondecreasing
EnsembleResult simulate_ensemble(const SolverConfig& cfg, int m_trajectories,
                                 std::vector<double> horizons = {}, int workers = 0);

}  // namespace levyns
