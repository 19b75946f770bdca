#include "levyns/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace levyns {

InitialCondition InitialCondition::single_mode(WaveVector k, Phase p, double amp) {
    InitialCondition ic;
    ic.kind = Kind::single_mode;
    ic.wave = k;
    ic.phase = p;
    ic.amplitude = amp;
    return ic;
}

InitialCondition InitialCondition::random_sobolev(double gamma, double norm) {
    InitialCondition ic;
    ic.kind = Kind::random_sobolev;
    ic.sobolev_gamma = gamma;
    ic.l2_norm = norm;
    return ic;
}

InitialCondition InitialCondition::from_field(SpectralField f) {
    InitialCondition ic;
    ic.kind = Kind::explicit_field;
    ic.field = std::move(f);
    return ic;
}

SpectralField build_initial(const Basis& basis, const InitialCondition& ic,
                            std::uint64_t master_seed) {
    const int n = basis.size();
    SpectralField u(n);
    switch (ic.kind) {
        case InitialCondition::Kind::zero:
            break;
        case InitialCondition::Kind::single_mode: {
            int found = -1;
            for (int i = 0; i < n; ++i) {
                const auto& m = basis.mode(i);
                if (m.wave.kx == ic.wave.kx && m.wave.ky == ic.wave.ky && m.phase == ic.phase)
                    found = i;
            }
            if (found < 0)
                throw std::invalid_argument("initial mode outside the Galerkin span");
            u[found] = ic.amplitude;
            break;
        }
        case InitialCondition::Kind::random_sobolev: {
            auto rng = make_rng(master_seed, StreamPurpose::initial);
            for (int i = 0; i < n; ++i)
                u[i] = std::pow(basis.lambda(i), -0.5 * ic.sobolev_gamma) * rng.normal();
            const double r = norm(basis, u, 0.0);
            if (r > 0.0)
                for (int i = 0; i < n; ++i) u[i] *= ic.l2_norm / r;
            break;
        }
        case InitialCondition::Kind::explicit_field: {
            const int src = ic.field.size();
            for (int i = 0; i < std::min(n, src); ++i) u[i] = ic.field[i];
            break;
        }
    }
    return u;
}

std::vector<std::string> validate_config(const SolverConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.n < 1) errs.push_back("spectral.n must be at least 1");
    if (!(cfg.dt > 0.0)) errs.push_back("solver.dt must be positive");
    if (cfg.horizon < 0.0) {
        errs.push_back("solver.T must be nonnegative");
    } else if (cfg.horizon > 0.0 && cfg.dt > 0.0) {
        if (cfg.horizon < cfg.dt * (1.0 - 1e-9)) {
            errs.push_back("solver.T must be 0 or at least one step");
        } else {
            const double ratio = cfg.horizon / cfg.dt;
            if (std::abs(ratio - static_cast<double>(std::llround(ratio))) >
                1e-9 * std::max(1.0, ratio))
                errs.push_back("solver.T must be an integer multiple of dt");
        }
    }
    if (cfg.snapshot_stride < 0) errs.push_back("solver.snapshot_stride must be nonnegative");

    if (cfg.initial.kind == InitialCondition::Kind::single_mode) {
        const auto& w = cfg.initial.wave;
        if (w.kx == 0 && w.ky == 0) {
            errs.push_back("initial wave must be nonzero (fields have vanishing mean)");
        } else if (!(w.ky > 0 || (w.ky == 0 && w.kx > 0))) {
            errs.push_back("initial wave must be canonical: ky > 0, or ky = 0 and kx > 0");
        }
        if (!std::isfinite(cfg.initial.amplitude))
            errs.push_back("initial amplitude must be finite");
    }
    if (cfg.initial.kind == InitialCondition::Kind::random_sobolev &&
        !(cfg.initial.l2_norm >= 0.0))
        errs.push_back("initial l2 norm must be nonnegative");

    if (!cfg.noise_off) {
        auto merrs = validate_measure(cfg.noise.measure);
        const bool measure_ok = merrs.empty();
        for (auto& e : merrs) errs.push_back(std::move(e));
        if (!(cfg.noise.theta > 0.0) || cfg.noise.theta > 1.0) {
            errs.push_back("noise.theta must lie in (0,1]");
        } else if (measure_ok) {
            const auto h = h_theta(cfg.noise);
            if (!h.finite) errs.push_back("hypothesis H_theta fails: " + h.reason);
        }
        if (cfg.noise.betas.rule == CoefficientSequence::Rule::list &&
            static_cast<int>(cfg.noise.betas.values.size()) < cfg.n)
            errs.push_back("noise.beta list shorter than the Galerkin size");
        if (cfg.noise_settings.backend == NoiseBackend::exact &&
            cfg.noise.measure.truncated())
            errs.push_back("exact noise backend supports only the untruncated stable family");
        if (cfg.noise_settings.backend == NoiseBackend::levy_ito) {
            const double d = cfg.noise_settings.small_jump_cutoff;
            if (!(d > 0.0) || d > 1.0)
                errs.push_back("noise.small_jump_cutoff must lie in (0,1]");
            else if (cfg.noise.measure.truncated() && d >= cfg.noise.measure.r_trunc)
                errs.push_back("noise.small_jump_cutoff must be below the truncation radius");
        }
    }
    return errs;
}

BlowUpError::BlowUpError(long long s, double t)
    : std::runtime_error("trajectory blew up at step " + std::to_string(s) + " (t=" +
                         std::to_string(t) + "): nonfinite coefficients"),
      step_index(s),
      time(t) {}

SpectralField step(const Basis& basis, const SpectralField& u, double dt,
                   const NoiseIncrement& dl, Scheme scheme, NonlinearBackend backend,
                   SpectralField* out_drifted) {
    const int n = u.size();
    if (basis.size() < n) throw std::invalid_argument("field larger than basis");
    if (!dl.dl.empty() && static_cast<int>(dl.dl.size()) != n)
        throw std::invalid_argument("noise increment size does not match the field");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

    const SpectralField b = nonlinear_term(basis, u, n, backend);
    SpectralField drifted(n), next(n);
    for (int j = 0; j < n; ++j) {
        const double lam = basis.lambda(j);
        const double dlj = dl.dl.empty() ? 0.0 : dl.dl[j];
        if (scheme == Scheme::exponential_euler) {
            const double z = -lam * dt;
            const double phi1 = std::abs(z) < 1e-12 ? 1.0 + 0.5 * z : std::expm1(z) / z;
            drifted[j] = std::exp(z) * u[j] - dt * phi1 * b[j];
            next[j] = drifted[j] + dlj;
        } else {
            const double den = 1.0 + lam * dt;
            drifted[j] = (u[j] - dt * b[j]) / den;
            next[j] = drifted[j] + dlj / den;
        }
    }
    if (out_drifted) *out_drifted = std::move(drifted);
    return next;
}

TrajectoryRecord simulate(const SolverConfig& cfg, std::uint64_t traj, const StepCallback& cb) {
    if (const auto errs = validate_config(cfg); !errs.empty()) {
        std::string msg = "invalid solver config:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    const Basis basis = Basis::build(cfg.n);
    SpectralField u = build_initial(basis, cfg.initial, cfg.seed);
    const double theta = cfg.noise.theta;

    std::optional<IncrementGenerator> gen;
    if (!cfg.noise_off) gen.emplace(cfg.noise, cfg.n, cfg.noise_settings, cfg.seed);

    TrajectoryRecord rec;
    rec.traj = traj;
    auto scalars_of = [&](double t, const SpectralField& v, int njumps) {
        StepScalars s;
        s.t = t;
        s.l2_norm = norm(basis, v, 0.0);
        s.h1_norm = norm(basis, v, 1.0);
        s.f_theta = std::pow(s.l2_norm * s.l2_norm + 1.0, 0.5 * theta);
        s.big_jumps = njumps;
        return s;
    };
    rec.scalars.push_back(scalars_of(0.0, u, 0));
    rec.snapshots.push_back({0.0, u});

    const long long steps = cfg.horizon > 0.0 ? std::llround(cfg.horizon / cfg.dt) : 0;
    SpectralField drifted(cfg.n);
    NoiseIncrement inc;
    inc.dt = cfg.dt;
    for (long long s = 1; s <= steps; ++s) {
        if (gen) {
            inc = gen->generate(traj, static_cast<std::uint64_t>(s), cfg.dt);
        }
        const double t0 = static_cast<double>(s - 1) * cfg.dt;
        const double t1 = static_cast<double>(s) * cfg.dt;
        SpectralField next = step(basis, u, cfg.dt, inc, cfg.scheme, cfg.nonlinear, &drifted);
        for (double v : next.a)
            if (!std::isfinite(v)) throw BlowUpError(s, t1);
        if (cb) cb(StepView{s, t0, t1, u, drifted, next, inc});
        u = std::move(next);
        rec.scalars.push_back(scalars_of(t1, u, static_cast<int>(inc.big_jumps.size())));
        for (const auto& bj : inc.big_jumps) rec.jump_log.emplace_back(t1, bj);
        if (cfg.snapshot_stride > 0 && s % cfg.snapshot_stride == 0)
            rec.snapshots.push_back({t1, u});
    }
    const double t_end = static_cast<double>(steps) * cfg.dt;
    if (rec.snapshots.back().t != t_end) rec.snapshots.push_back({t_end, u});
    return rec;
}

namespace {

// prefix statistics over the recorded per-step scalars: running sup of
// ||u||^theta and trapezoids of the two gradient integrands, registered at the
// requested horizon step indices
void fill_summary(const TrajectoryRecord& rec, double theta, double dt,
                  const std::vector<long long>& hsteps, TrajectorySummary& out) {
    const auto& sc = rec.scalars;
    auto weighted = [theta](const StepScalars& s) {
        return s.h1_norm * s.h1_norm /
               std::pow(s.l2_norm * s.l2_norm + 1.0, 1.0 - 0.5 * theta);
    };
    auto grad_theta = [theta](const StepScalars& s) { return std::pow(s.h1_norm, theta); };

    double sup = std::pow(sc[0].l2_norm, theta);
    double integral = 0.0, grad = 0.0;
    std::size_t h = 0;
    auto flush = [&](long long i) {
        while (h < hsteps.size() && hsteps[h] == i) {
            out.sup_at.push_back(sup);
            out.integral_at.push_back(integral);
            out.grad_theta_at.push_back(grad);
            ++h;
        }
    };
    flush(0);
    for (std::size_t i = 1; i < sc.size(); ++i) {
        sup = std::max(sup, std::pow(sc[i].l2_norm, theta));
        integral += 0.5 * dt * (weighted(sc[i - 1]) + weighted(sc[i]));
        grad += 0.5 * dt * (grad_theta(sc[i - 1]) + grad_theta(sc[i]));
        flush(static_cast<long long>(i));
    }
    out.big_jump_count = static_cast<long long>(rec.jump_log.size());
}

}  // namespace

EnsembleResult simulate_ensemble(const SolverConfig& cfg, int m_trajectories,
                                 std::vector<double> horizons, int workers) {
    if (m_trajectories < 1)
        throw std::invalid_argument("ensemble needs at least one trajectory");
    if (const auto errs = validate_config(cfg); !errs.empty()) {
        std::string msg = "invalid solver config:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    if (horizons.empty()) horizons = {cfg.horizon};
    std::vector<long long> hsteps;
    hsteps.reserve(horizons.size());
    for (double t : horizons) {
        if (t < 0.0 || t > cfg.horizon * (1.0 + 1e-12))
            throw std::invalid_argument("horizon outside [0, T]");
        const double ratio = t / cfg.dt;
        const long long k = std::llround(ratio);
        if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument("horizons must be integer multiples of dt");
        if (!hsteps.empty() && k < hsteps.back())
            throw std::invalid_argument("horizons must be nondecreasing");
        hsteps.push_back(k);
    }

    SolverConfig run = cfg;
    run.snapshot_stride = 0;  // summaries need scalars only

    EnsembleResult res;
    res.horizons = std::move(horizons);
    res.summaries.resize(m_trajectories);

#ifdef _OPENMP
    const int nthreads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    const int nthreads = 1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (int i = 0; i < m_trajectories; ++i) {
        TrajectorySummary s;
        s.traj = static_cast<std::uint64_t>(i);
        try {
            const TrajectoryRecord rec = simulate(run, static_cast<std::uint64_t>(i));
            fill_summary(rec, run.noise.theta, run.dt, hsteps, s);
        } catch (const BlowUpError& e) {
            s.flagged = true;
            s.blow_up_step = e.step_index;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            s.sup_at.assign(hsteps.size(), nan);
            s.integral_at.assign(hsteps.size(), nan);
            s.grad_theta_at.assign(hsteps.size(), nan);
        }
        res.summaries[i] = std::move(s);
    }
    for (const auto& s : res.summaries)
        if (s.flagged) ++res.flagged;
    return res;
}

}  // namespace levyns
