#include "levyns/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levyns/diagnostics.hpp"

namespace levyns {

std::string ObservableSpec::name() const {
    switch (kind) {
        case ObservableKind::l2_norm: return "l2";
        case ObservableKind::h1_theta: return "h1theta";
        case ObservableKind::mode_coeff: return "mode:" + std::to_string(mode);
        case ObservableKind::f_theta_obs: return "ftheta";
        case ObservableKind::energy_band:
            return "band:" + std::to_string(band_lo) + ":" + std::to_string(band_hi);
    }
    return "l2";
}

ObservableSpec ObservableSpec::parse(const std::string& token) {
    auto bad = [&]() -> std::invalid_argument {
        return std::invalid_argument("unknown observable \"" + token +
                                     "\" (expected l2, h1theta, ftheta, mode:j, band:m1:m2)");
    };
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != s.size() || v < 1) throw bad();
        return v;
    };
    ObservableSpec spec;
    if (token == "l2") {
        spec.kind = ObservableKind::l2_norm;
    } else if (token == "h1theta") {
        spec.kind = ObservableKind::h1_theta;
    } else if (token == "ftheta") {
        spec.kind = ObservableKind::f_theta_obs;
    } else if (token.rfind("mode:", 0) == 0) {
        spec.kind = ObservableKind::mode_coeff;
        spec.mode = to_int(token.substr(5));
    } else if (token.rfind("band:", 0) == 0) {
        const std::string rest = token.substr(5);
        const std::size_t colon = rest.find(':');
        if (colon == std::string::npos) throw bad();
        spec.kind = ObservableKind::energy_band;
        spec.band_lo = to_int(rest.substr(0, colon));
        spec.band_hi = to_int(rest.substr(colon + 1));
        if (spec.band_hi < spec.band_lo) throw bad();
    } else {
        throw bad();
    }
    return spec;
}

double evaluate_observable(const Basis& basis, const SpectralField& u,
                           const ObservableSpec& spec, double theta) {
    switch (spec.kind) {
        case ObservableKind::l2_norm:
            return norm(basis, u, 0.0);
        case ObservableKind::h1_theta:
            return std::pow(norm(basis, u, 1.0), theta);
        case ObservableKind::mode_coeff:
            if (spec.mode < 1 || spec.mode > u.size())
                throw std::invalid_argument("observable mode outside the basis");
            return u[spec.mode - 1];
        case ObservableKind::f_theta_obs:
            return f_theta(basis, u, theta);
        case ObservableKind::energy_band: {
            if (spec.band_lo < 1 || spec.band_hi > u.size())
                throw std::invalid_argument("observable band outside the basis");
            double e = 0.0;
            for (int i = spec.band_lo - 1; i < spec.band_hi; ++i) e += u[i] * u[i];
            return e;
        }
    }
    return 0.0;
}

namespace {

bool signed_observable(const ObservableSpec& spec) {
    return spec.kind == ObservableKind::mode_coeff;
}

double autocorr(const std::vector<double>& xs, long long lag) {
    const long long n = static_cast<long long>(xs.size());
    if (lag >= n) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0, cov = 0.0;
    for (long long i = 0; i < n; ++i) var += (xs[i] - mean) * (xs[i] - mean);
    for (long long i = 0; i + lag < n; ++i) cov += (xs[i] - mean) * (xs[i + lag] - mean);
    var /= static_cast<double>(n);
    cov /= static_cast<double>(n - lag);
    if (var <= 1e-300) return 0.0;  // flat series: every stride decorrelates
    return cov / var;
}

// smallest lag in {10, 20, 40, ...} with autocorrelation below 0.2, capped
// once fewer than 4 stride-spaced samples would remain
long long resolve_stride(const std::vector<double>& l2_series) {
    for (long long lag = 10;; lag *= 2) {
        if (4 * lag > static_cast<long long>(l2_series.size())) return lag;
        if (autocorr(l2_series, lag) < 0.2) return lag;
    }
}

struct TrajSamples {
    bool flagged = false;
    std::vector<double> times;
    std::vector<std::vector<double>> vals;  // [observable][sample]
};

TrajSamples collect_trajectory(const SolverConfig& cfg, const Basis& basis,
                               const std::vector<ObservableSpec>& observables,
                               std::uint64_t traj, long long s0, long long stride) {
    TrajSamples out;
    out.vals.resize(observables.size());
    const double theta = cfg.noise.theta;
    auto record = [&](double t, const SpectralField& u) {
        out.times.push_back(t);
        for (std::size_t o = 0; o < observables.size(); ++o)
            out.vals[o].push_back(evaluate_observable(basis, u, observables[o], theta));
    };
    try {
        if (s0 == 0) record(0.0, build_initial(basis, cfg.initial, cfg.seed));
        simulate(cfg, traj, [&](const StepView& v) {
            if (v.step >= std::max<long long>(s0, 1) && (v.step - s0) % stride == 0)
                record(v.t1, v.after);
        });
    } catch (const BlowUpError&) {
        out.flagged = true;
    }
    return out;
}

}  // namespace

EmpiricalMeasure kb_estimate(const SolverConfig& cfg,
                             const std::vector<ObservableSpec>& observables,
                             double burn_in, long long stride, int m_trajectories,
                             std::vector<Window> windows, int workers) {
    if (observables.empty()) throw std::invalid_argument("no observables given");
    if (m_trajectories < 1) throw std::invalid_argument("need at least one trajectory");
    for (const auto& o : observables) {
        if (o.kind == ObservableKind::mode_coeff && (o.mode < 1 || o.mode > cfg.n))
            throw std::invalid_argument("observable mode outside the basis");
        if (o.kind == ObservableKind::energy_band &&
            (o.band_lo < 1 || o.band_lo > o.band_hi || o.band_hi > cfg.n))
            throw std::invalid_argument("observable band outside the basis");
    }
    const double T = cfg.horizon;
    EmpiricalMeasure out;
    out.burn_in = burn_in < 0.0 ? 0.5 * T : burn_in;
    if (!(out.burn_in < T))
        throw std::invalid_argument("burn-in must be below the horizon");
    if (windows.empty()) windows.push_back({out.burn_in, T});
    for (const auto& w : windows) {
        if (!(w.t_lo < w.t_hi)) throw std::invalid_argument("window needs t_lo < t_hi");
        if (w.t_lo < out.burn_in - 1e-12 || w.t_hi > T + 1e-9 * std::max(1.0, T))
            throw std::invalid_argument("window outside [burn_in, T]");
    }
    out.windows = windows;
    out.observables = observables;
    out.trajectories = m_trajectories;

    const Basis basis = Basis::build(cfg.n);
    const long long s0 =
        static_cast<long long>(std::ceil(out.burn_in / cfg.dt - 1e-9));

    // pilot trajectory fixes both the stride and the histogram edges
    TrajSamples pilot;
    {
        int candidate = 0;
        const int tries = std::min(m_trajectories, 8);
        for (; candidate < tries; ++candidate) {
            pilot = collect_trajectory(cfg, basis, observables,
                                       static_cast<std::uint64_t>(candidate), s0, 1);
            if (!pilot.flagged) break;
        }
        if (pilot.flagged)
            throw std::runtime_error("pilot trajectory blew up; cannot fix histogram edges");
    }
    if (stride <= 0) {
        // adapt on the l2 series whether or not it was requested as an observable
        std::vector<double> l2;
        ObservableSpec l2spec;
        for (std::size_t o = 0; o < observables.size(); ++o)
            if (observables[o].kind == ObservableKind::l2_norm) l2 = pilot.vals[o];
        if (l2.empty()) {
            l2.reserve(pilot.times.size());
            // recompute is not possible without fields; rerun the pilot on l2 only
            const TrajSamples p2 = collect_trajectory(cfg, basis, {l2spec}, 0, s0, 1);
            l2 = p2.vals[0];
        }
        stride = resolve_stride(l2);
    }
    out.stride = stride;

    std::vector<double> his(observables.size(), 1.0), los(observables.size(), 0.0);
    for (std::size_t o = 0; o < observables.size(); ++o) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < pilot.vals[o].size(); i += stride) {
            const double v = pilot.vals[o][i];
            xs.push_back(signed_observable(observables[o]) ? std::abs(v) : v);
        }
        std::sort(xs.begin(), xs.end());
        const double q = xs.empty() ? 0.0 : quantile_sorted(xs, 0.995);
        const double hi = q * 1.001 > 0.0 ? q * 1.001 : 1.0;
        his[o] = hi;
        los[o] = signed_observable(observables[o]) ? -hi : 0.0;
    }

    std::vector<TrajSamples> per(m_trajectories);
#ifdef _OPENMP
    const int nthreads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    const int nthreads = 1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (int i = 0; i < m_trajectories; ++i)
        per[i] = collect_trajectory(cfg, basis, observables,
                                    static_cast<std::uint64_t>(i), s0, stride);
    for (const auto& t : per) out.flagged += t.flagged ? 1 : 0;

    auto in_window = [&](double t, const Window& w) {
        const double tol = 1e-9 * std::max(1.0, std::abs(t));
        if (t < w.t_lo - tol) return false;
        if (t < w.t_hi - tol) return true;
        // windows are half-open on the right so adjacent ones stay disjoint,
        // except that the horizon itself belongs to the window ending there
        return std::abs(w.t_hi - T) <= tol && std::abs(t - T) <= tol;
    };

    out.measures.assign(observables.size(), {});
    for (std::size_t o = 0; o < observables.size(); ++o) {
        for (const auto& w : windows) {
            ObservableMeasure m;
            m.spec = observables[o];
            m.window = w;
            std::vector<double> pooled;
            for (const auto& t : per) {
                if (t.flagged) continue;
                std::vector<double> mine;
                for (std::size_t k = 0; k < t.times.size(); ++k)
                    if (in_window(t.times[k], w)) mine.push_back(t.vals[o][k]);
                pooled.insert(pooled.end(), mine.begin(), mine.end());
                m.per_traj.push_back(std::move(mine));
            }
            m.samples = static_cast<long long>(pooled.size());
            m.underpowered = m.samples < 100;
            Welford pool_w;
            for (double x : pooled) pool_w.add(x);
            m.mean = pool_w.mean;
            Welford traj_means;
            for (const auto& v : m.per_traj) {
                if (v.empty()) continue;
                Welford wt;
                for (double x : v) wt.add(x);
                traj_means.add(wt.mean);
            }
            m.se = traj_means.n > 1 ? traj_means.se_mean() : pool_w.se_mean();
            m.hist = make_histogram(pooled, los[o], his[o]);
            out.measures[o].push_back(std::move(m));
        }
    }
    return out;
}

StationarityReport window_stationarity_test(const EmpiricalMeasure& m, std::size_t win_a,
                                            std::size_t win_b, int permutations,
                                            std::uint64_t seed) {
    if (win_a >= m.windows.size() || win_b >= m.windows.size() || win_a == win_b)
        throw std::invalid_argument("window index out of range");
    const Window& a = m.windows[win_a];
    const Window& b = m.windows[win_b];
    if (std::max(a.t_lo, b.t_lo) < std::min(a.t_hi, b.t_hi) - 1e-12)
        throw std::invalid_argument("stationarity test needs disjoint windows");

    StationarityReport rep;
    rep.window_a = a;
    rep.window_b = b;
    auto rng = make_rng(seed, StreamPurpose::permutation);
    for (std::size_t o = 0; o < m.observables.size(); ++o) {
        const ObservableMeasure& ma = m.measures[o][win_a];
        const ObservableMeasure& mb = m.measures[o][win_b];
        StationarityResult r;
        r.observable = m.observables[o].name();
        r.underpowered = ma.samples < 100 || mb.samples < 100;
        std::vector<std::pair<std::vector<double>, std::vector<double>>> blocks;
        for (std::size_t i = 0; i < ma.per_traj.size(); ++i)
            blocks.emplace_back(ma.per_traj[i], mb.per_traj[i]);
        r.ks = block_permutation_ks(blocks, permutations, rng);
        if (!r.underpowered && !r.ks.pass_1pct) rep.stationary = false;
        rep.results.push_back(std::move(r));
    }
    return rep;
}

SensitivityReport initial_condition_sensitivity(const std::vector<EmpiricalMeasure>& ms,
                                                std::size_t window) {
    if (ms.size() < 2)
        throw std::invalid_argument("sensitivity needs at least two measures");
    for (const auto& m : ms) {
        if (window >= m.windows.size())
            throw std::invalid_argument("window index out of range");
        if (m.observables.size() != ms.front().observables.size())
            throw std::invalid_argument("measures track different observables");
        for (std::size_t o = 0; o < m.observables.size(); ++o)
            if (m.observables[o].name() != ms.front().observables[o].name())
                throw std::invalid_argument("measures track different observables");
    }
    auto pooled_sorted = [&](const EmpiricalMeasure& m, std::size_t o) {
        std::vector<double> xs;
        for (const auto& v : m.measures[o][window].per_traj)
            xs.insert(xs.end(), v.begin(), v.end());
        std::sort(xs.begin(), xs.end());
        return xs;
    };
    SensitivityReport rep;
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (std::size_t j = i + 1; j < ms.size(); ++j)
            for (std::size_t o = 0; o < ms.front().observables.size(); ++o) {
                SensitivityEntry e;
                e.config_a = i;
                e.config_b = j;
                e.observable = ms.front().observables[o].name();
                e.d = ks_statistic(pooled_sorted(ms[i], o), pooled_sorted(ms[j], o));
                rep.entries.push_back(std::move(e));
            }
    return rep;
}

}  // namespace levyns
