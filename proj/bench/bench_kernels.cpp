// Micro-benchmark for the nonlinear-term backends and ensemble worker scaling.
// Not a test: prints timings and cross-backend agreement so a change to the
// kernels can be judged quickly. Build target: levyns-bench.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "levyns/nonlinear.hpp"
#include "levyns/rng.hpp"
#include "levyns/solver.hpp"
#include "levyns/spectral.hpp"

using namespace levyns;

namespace {

SpectralField random_field(const Basis& basis, std::uint64_t seed) {
    CounterRng rng = make_rng(seed, StreamPurpose::sampler);
    SpectralField u(basis.size());
    double s2 = 0.0;
    for (int i = 0; i < basis.size(); ++i) {
        u[i] = rng.normal() / basis.lambda(i);
        s2 += u[i] * u[i];
    }
    for (int i = 0; i < basis.size(); ++i) u[i] /= std::sqrt(s2);
    return u;
}

template <typename Fn>
double usec_per_call(Fn&& fn) {
    using clock = std::chrono::steady_clock;
    // warm up, then repeat until the sample is long enough to trust
    fn();
    int calls = 1;
    for (;;) {
        const auto t0 = clock::now();
        for (int i = 0; i < calls; ++i) fn();
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        if (secs >= 0.2) return secs / calls * 1e6;
        calls = secs > 0.0 ? static_cast<int>(calls * std::max(2.0, 0.25 / secs)) : calls * 8;
    }
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

int main() {
    std::printf("nonlinear_term backends (microseconds per evaluation)\n");
    std::printf("%6s %12s %12s %14s %16s %18s\n", "n", "serial", "openmp", "collocation",
                "|serial-openmp|", "|serial-colloc|");
    for (int n : {16, 32, 64}) {
        const Basis basis = Basis::build(n);
        const SpectralField u = random_field(basis, 1234 + n);
        SpectralField sink(n);
        const double t_serial =
            usec_per_call([&] { sink = nonlinear_term(basis, u, n, NonlinearBackend::serial); });
        const SpectralField ref = nonlinear_term(basis, u, n, NonlinearBackend::serial);
        const double t_openmp =
            usec_per_call([&] { sink = nonlinear_term(basis, u, n, NonlinearBackend::openmp); });
        const SpectralField omp = nonlinear_term(basis, u, n, NonlinearBackend::openmp);
        const double t_coll = usec_per_call(
            [&] { sink = nonlinear_term(basis, u, n, NonlinearBackend::collocation); });
        const SpectralField coll = nonlinear_term(basis, u, n, NonlinearBackend::collocation);
        std::printf("%6d %12.2f %12.2f %14.2f %16.2e %18.2e\n", n, t_serial, t_openmp, t_coll,
                    max_abs_diff(ref, omp), max_abs_diff(ref, coll));
    }

    std::printf("\nensemble worker scaling (32 trajectories, n=32, 200 steps)\n");
    SolverConfig cfg;
    cfg.n = 32;
    cfg.dt = 1e-3;
    cfg.horizon = 0.2;
    cfg.noise.measure.alpha = 1.5;
    cfg.noise.betas = CoefficientSequence::power_rule(2.0);
    cfg.noise.theta = 1.0;
    cfg.seed = 77;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    for (unsigned w : {1u, hw}) {
        using clock = std::chrono::steady_clock;
        const auto t0 = clock::now();
        const EnsembleResult r = simulate_ensemble(cfg, 32, {}, static_cast<int>(w));
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        std::printf("  workers=%-2u  %.3fs  (flagged %d)\n", w, secs, r.flagged);
        if (hw == 1) break;  // single-core machine: one line says it all
    }
    return 0;
}
