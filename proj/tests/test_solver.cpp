#include <doctest.h>

#include <cmath>
#include <vector>

#include "levyns/solver.hpp"
#include "levyns/stats.hpp"
#include "oracles.hpp"

using namespace levyns;

namespace {

LevyNoiseSpec driven_noise(double alpha = 1.5, double theta = 1.0, double beta_exp = 2.0) {
    LevyNoiseSpec s;
    s.measure.family = LevyFamily::symmetric_stable;
    s.measure.alpha = alpha;
    s.measure.intensity = 1.0;
    s.betas = CoefficientSequence::power_rule(beta_exp);
    s.theta = theta;
    return s;
}

SolverConfig driven_config(int n, double dt, double horizon, std::uint64_t seed) {
    SolverConfig cfg;
    cfg.n = n;
    cfg.dt = dt;
    cfg.horizon = horizon;
    cfg.noise = driven_noise();
    cfg.seed = seed;
    return cfg;
}

double field_distance(const SpectralField& a, const SpectralField& b, int m) {
    double d2 = 0.0;
    for (int i = 0; i < m; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d2);
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("one step without forcing decays a linear mode per scheme") {
    const Basis basis = Basis::build(4);
    const double lam = basis.lambda(0);
    const double dt = 1e-3;
    SpectralField u(4);
    u[0] = 1.0;
    NoiseIncrement none;

    SpectralField drifted(4);
    const SpectralField ee = step(basis, u, dt, none, Scheme::exponential_euler,
                                  NonlinearBackend::serial, &drifted);
    CHECK(ee[0] == doctest::Approx(std::exp(-lam * dt)).epsilon(1e-15));
    CHECK(ee[1] == 0.0);
    CHECK(ee[2] == 0.0);
    CHECK(ee[3] == 0.0);
    CHECK(drifted[0] == ee[0]);

    const SpectralField si = step(basis, u, dt, none, Scheme::semi_implicit_euler);
    CHECK(si[0] == doctest::Approx(1.0 / (1.0 + lam * dt)).epsilon(1e-15));
    CHECK(si[1] == 0.0);
}

TEST_CASE("the jump increment is added at step end, scheme-specifically") {
    const Basis basis = Basis::build(4);
    const double lam = basis.lambda(0);
    const double dt = 2e-3;
    SpectralField u(4);
    u[0] = 0.4;
    NoiseIncrement inc;
    inc.dl = {0.3, 0.0, -0.1, 0.0};
    inc.dt = dt;
    NoiseIncrement none;

    const SpectralField ee0 = step(basis, u, dt, none, Scheme::exponential_euler);
    const SpectralField ee = step(basis, u, dt, inc, Scheme::exponential_euler);
    CHECK(ee[0] == ee0[0] + 0.3);  // exact: after = drifted + dl
    CHECK(ee[2] == ee0[2] - 0.1);

    const SpectralField si0 = step(basis, u, dt, none, Scheme::semi_implicit_euler);
    const SpectralField si = step(basis, u, dt, inc, Scheme::semi_implicit_euler);
    CHECK(si[0] == doctest::Approx(si0[0] + 0.3 / (1.0 + lam * dt)).epsilon(1e-15));
}

TEST_CASE("zero is a fixed point of both schemes") {
    const Basis basis = Basis::build(8);
    SpectralField u(8);
    NoiseIncrement none;
    for (Scheme s : {Scheme::exponential_euler, Scheme::semi_implicit_euler}) {
        const SpectralField next = step(basis, u, 1e-2, none, s);
        for (int i = 0; i < 8; ++i) CHECK(next[i] == 0.0);
    }
}

TEST_CASE("one-step error against an RK4 oracle is second order in dt") {
    const Basis basis = Basis::build(8);
    const SpectralField u0 = build_initial(basis, InitialCondition::random_sobolev(2.0, 1.0), 7);
    auto rhs = [&](const SpectralField& v) {
        SpectralField r = nonlinear_term(basis, v, v.size());
        for (int i = 0; i < v.size(); ++i) r[i] = -basis.lambda(i) * v[i] - r[i];
        return r;
    };
    auto reference = [&](double dt) {
        SpectralField v = u0;
        for (int s = 0; s < 64; ++s) v = oracles::rk4_step(v, dt / 64.0, rhs);
        return v;
    };
    NoiseIncrement none;
    for (Scheme scheme : {Scheme::exponential_euler, Scheme::semi_implicit_euler}) {
        CAPTURE(static_cast<int>(scheme));
        std::vector<double> errs;
        for (double dt : {1e-3, 5e-4, 2.5e-4}) {
            const SpectralField got = step(basis, u0, dt, none, scheme);
            errs.push_back(field_distance(got, reference(dt), 8));
        }
        CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.2));
        CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.2));
    }
}

TEST_CASE("single-mode decay matches the exact solution") {
    SolverConfig cfg;
    cfg.n = 4;
    cfg.dt = 1e-4;
    cfg.horizon = 0.1;
    cfg.noise_off = true;
    cfg.initial = InitialCondition::single_mode({0, 1}, Phase::cosine, 1.0);
    const TrajectoryRecord rec = simulate(cfg);
    const Basis basis = Basis::build(4);
    const double expect = std::exp(-basis.lambda(0) * cfg.horizon);
    CHECK(rec.scalars.back().l2_norm == doctest::Approx(expect).epsilon(1e-6));
    const SpectralField& last = rec.snapshots.back().field;
    CHECK(last[1] == 0.0);  // a single shear mode stays single: B vanishes
    CHECK(last[2] == 0.0);
    CHECK(last[3] == 0.0);
}

TEST_CASE("noise-off trajectories respect the Poincare decay envelope") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.dt = 1e-3;
    cfg.horizon = 0.5;
    cfg.noise_off = true;
    cfg.initial = InitialCondition::random_sobolev(2.0, 1.0);
    cfg.seed = 13;
    const TrajectoryRecord rec = simulate(cfg);
    const double lam1 = Basis::build(32).lambda_min();
    for (const auto& s : rec.scalars)
        CHECK(s.l2_norm <= std::exp(-lam1 * s.t) * (1.0 + 1e-3));
}

TEST_CASE("a zero horizon records only the projected initial state") {
    SolverConfig cfg = driven_config(8, 1e-3, 0.0, 3);
    cfg.initial = InitialCondition::single_mode({1, 0}, Phase::sine, 2.0);
    const TrajectoryRecord rec = simulate(cfg);
    REQUIRE(rec.scalars.size() == 1);
    REQUIRE(rec.snapshots.size() == 1);
    CHECK(rec.scalars[0].t == 0.0);
    CHECK(rec.snapshots[0].t == 0.0);
    CHECK(rec.snapshots[0].field[3] == 2.0);
    CHECK(rec.scalars[0].l2_norm == doctest::Approx(2.0));
    CHECK(rec.jump_log.empty());
}

TEST_CASE("a full step equals a zero half-step then a jump half-step in the linear regime") {
    // n = 2 keeps a single wave vector, so the nonlinearity vanishes identically
    const Basis basis = Basis::build(2);
    SpectralField u(2);
    u[0] = 0.7;
    u[1] = -0.3;
    NoiseIncrement full, none;
    full.dl = {0.2, 0.5};
    const SpectralField direct = step(basis, u, 0.02, full, Scheme::exponential_euler);
    const SpectralField half = step(basis, u, 0.01, none, Scheme::exponential_euler);
    const SpectralField split = step(basis, half, 0.01, full, Scheme::exponential_euler);
    CHECK(split[0] == doctest::Approx(direct[0]).epsilon(1e-14));
    CHECK(split[1] == doctest::Approx(direct[1]).epsilon(1e-14));
}

TEST_CASE("discrete energy balance closes to second order in dt") {
    const Basis basis = Basis::build(8);
    const SpectralField u0 = build_initial(basis, InitialCondition::random_sobolev(2.0, 1.0), 3);
    double e0 = 0.0, g0 = 0.0;
    for (int i = 0; i < 8; ++i) {
        e0 += u0[i] * u0[i];
        g0 += basis.lambda(i) * u0[i] * u0[i];
    }
    NoiseIncrement none;
    for (Scheme scheme : {Scheme::exponential_euler, Scheme::semi_implicit_euler}) {
        CAPTURE(static_cast<int>(scheme));
        std::vector<double> residuals;
        for (double dt : {1e-3, 5e-4, 2.5e-4}) {
            const SpectralField u1 = step(basis, u0, dt, none, scheme);
            double e1 = 0.0;
            for (int i = 0; i < 8; ++i) e1 += u1[i] * u1[i];
            residuals.push_back(std::abs(e1 - e0 + 2.0 * g0 * dt));
        }
        CHECK(residuals[0] / residuals[1] >= 3.2);
        CHECK(residuals[0] / residuals[1] <= 4.8);
        CHECK(residuals[1] / residuals[2] >= 3.2);
        CHECK(residuals[1] / residuals[2] <= 4.8);
    }
}

TEST_CASE("Galerkin sizes agree on shared modes under a shared noise restriction") {
    // noise lives on the first 4 modes only, so every size shares the driver;
    // the frozen initial state occupies both |k|^2 = 1 and |k|^2 = 2 shells —
    // same-magnitude wave pairs alone would not interact at all in 2d
    std::vector<double> betas(64, 0.0);
    for (int j = 1; j <= 4; ++j) betas[j - 1] = 1.0 / (j * j);
    const SpectralField phi =
        build_initial(Basis::build(8), InitialCondition::random_sobolev(2.0, 1.0), 11);
    SolverConfig base = driven_config(8, 1e-3, 0.2, 11);
    base.noise.betas = CoefficientSequence::explicit_list(betas);
    base.initial = InitialCondition::from_field(phi);

    std::vector<SpectralField> finals;
    for (int n : {8, 16, 32, 64}) {
        SolverConfig cfg = base;
        cfg.n = n;
        finals.push_back(simulate(cfg).snapshots.back().field);
    }
    // distance to the finest run on the shared modes shrinks as n grows
    const double d_8 = field_distance(finals[0], finals[3], 8);
    const double d_16 = field_distance(finals[1], finals[3], 8);
    const double d_32 = field_distance(finals[2], finals[3], 8);
    CHECK(d_8 > 0.0);
    CHECK(d_16 < d_8);
    CHECK(d_32 < d_16);
}

TEST_CASE("recorded state jumps exactly when the big-jump log says so") {
    SolverConfig cfg = driven_config(4, 1e-2, 1.0, 5);
    cfg.noise_settings.backend = NoiseBackend::levy_ito;
    cfg.noise_settings.small_jump_cutoff = 1.0;  // every surviving jump is logged

    long long logged = 0;
    simulate(cfg, 0, [&](const StepView& v) {
        if (v.increment.big_jumps.empty()) {
            for (int i = 0; i < 4; ++i) CHECK(v.after[i] == v.drifted[i]);
        } else {
            double budget = 0.0;
            for (const auto& bj : v.increment.big_jumps) {
                CHECK(bj.mode >= 1);
                CHECK(bj.mode <= 4);
                CHECK(std::abs(bj.y) > 1.0);
                budget += cfg.noise.betas.beta(bj.mode) * std::abs(bj.y);
            }
            double d2 = 0.0;
            for (int i = 0; i < 4; ++i)
                d2 += (v.after[i] - v.drifted[i]) * (v.after[i] - v.drifted[i]);
            CHECK(std::sqrt(d2) <= budget + 1e-12);
            logged += static_cast<long long>(v.increment.big_jumps.size());
        }
    });
    const TrajectoryRecord rec = simulate(cfg);
    CHECK(rec.jump_log.size() == static_cast<std::size_t>(logged));
    CHECK(logged > 0);  // rate 2c/alpha per mode makes zero jumps over T=1 a 0.5% event
    long long from_scalars = 0;
    for (const auto& s : rec.scalars) from_scalars += s.big_jumps;
    CHECK(from_scalars == logged);
}

TEST_CASE("simulate is deterministic and trajectory streams are disjoint") {
    const SolverConfig cfg = driven_config(8, 1e-3, 0.1, 17);
    const TrajectoryRecord a = simulate(cfg, 0);
    const TrajectoryRecord b = simulate(cfg, 0);
    REQUIRE(a.scalars.size() == b.scalars.size());
    for (std::size_t i = 0; i < a.scalars.size(); ++i)
        CHECK(a.scalars[i].l2_norm == b.scalars[i].l2_norm);

    const TrajectoryRecord c = simulate(cfg, 1);
    // ensembles share the initial state; the paths must then separate
    for (int i = 0; i < 8; ++i)
        CHECK(a.snapshots.front().field[i] == c.snapshots.front().field[i]);
    bool differs = false;
    for (std::size_t i = 0; i < a.scalars.size(); ++i)
        if (a.scalars[i].l2_norm != c.scalars[i].l2_norm) differs = true;
    CHECK(differs);
}

TEST_CASE("a blow-up carries its step index and ensembles flag it") {
    SolverConfig cfg;
    cfg.n = 8;
    cfg.dt = 1e-3;
    cfg.horizon = 0.01;
    cfg.noise_off = true;
    cfg.initial = InitialCondition::random_sobolev(2.0, 1e160);  // B ~ ||u||^2 overflows
    cfg.seed = 9;
    CHECK_THROWS_AS(simulate(cfg), BlowUpError);
    try {
        simulate(cfg);
    } catch (const BlowUpError& e) {
        CHECK(e.step_index == 1);
        CHECK(e.time == doctest::Approx(1e-3));
    }

    const EnsembleResult ens = simulate_ensemble(cfg, 3);
    CHECK(ens.flagged == 3);
    for (const auto& s : ens.summaries) {
        CHECK(s.flagged);
        CHECK(s.blow_up_step == 1);
        REQUIRE(s.sup_at.size() == 1);
        CHECK(std::isnan(s.sup_at[0]));
    }
}

TEST_CASE("ensemble summaries are prefix-consistent across horizons and reruns") {
    SolverConfig cfg = driven_config(8, 1e-3, 0.5, 21);
    const EnsembleResult two = simulate_ensemble(cfg, 4, {0.25, 0.5});
    SolverConfig half = cfg;
    half.horizon = 0.25;
    const EnsembleResult one = simulate_ensemble(half, 4, {0.25});
    for (int i = 0; i < 4; ++i) {
        CHECK(two.summaries[i].sup_at[0] == one.summaries[i].sup_at[0]);
        CHECK(two.summaries[i].integral_at[0] == one.summaries[i].integral_at[0]);
        CHECK(two.summaries[i].grad_theta_at[0] == one.summaries[i].grad_theta_at[0]);
        CHECK(two.summaries[i].sup_at[1] >= two.summaries[i].sup_at[0]);  // sup is monotone
    }

    const EnsembleResult rerun = simulate_ensemble(cfg, 4, {0.25, 0.5});
    for (int i = 0; i < 4; ++i)
        CHECK(two.summaries[i].sup_at[1] == rerun.summaries[i].sup_at[1]);

    // M = 1 reduces to the single-trajectory path
    const EnsembleResult single = simulate_ensemble(cfg, 1, {0.25, 0.5});
    CHECK(single.summaries[0].sup_at[1] == two.summaries[0].sup_at[1]);
}

TEST_CASE("validate_config names every violation at once") {
    SolverConfig cfg;
    cfg.n = 4;
    cfg.dt = -1.0;
    cfg.horizon = 1.0;
    cfg.initial = InitialCondition::single_mode({0, -1}, Phase::cosine, 1.0);
    cfg.noise = driven_noise(0.9, 1.0);  // theta >= alpha: H_theta diverges
    cfg.noise.betas = CoefficientSequence::explicit_list({1.0, 0.5});
    cfg.noise_settings.backend = NoiseBackend::levy_ito;
    cfg.noise_settings.small_jump_cutoff = 0.0;

    const auto errs = validate_config(cfg);
    auto has = [&](const std::string& what) {
        for (const auto& e : errs)
            if (e.find(what) != std::string::npos) return true;
        return false;
    };
    CHECK(has("dt must be positive"));
    CHECK(has("canonical"));
    CHECK(has("H_theta fails"));
    CHECK(has("beta list shorter"));
    CHECK(has("small_jump_cutoff"));
    CHECK(errs.size() >= 5);

    CHECK_THROWS_WITH_AS(simulate(cfg), doctest::Contains("invalid solver config:"),
                         std::invalid_argument);

    // horizon alignment is its own violation
    SolverConfig misaligned = driven_config(4, 1e-3, 0.0105, 1);
    const auto errs2 = validate_config(misaligned);
    REQUIRE(errs2.size() == 1);
    CHECK(errs2[0].find("integer multiple") != std::string::npos);
}

TEST_CASE("initial presets build the documented fields") {
    const Basis basis = Basis::build(8);

    const SpectralField sine =
        build_initial(basis, InitialCondition::single_mode({0, 1}, Phase::sine, 2.0), 0);
    CHECK(sine[1] == 2.0);
    CHECK(norm(basis, sine, 0.0) == doctest::Approx(2.0));

    const SpectralField cosx =
        build_initial(basis, InitialCondition::single_mode({1, 0}, Phase::cosine, -0.5), 0);
    CHECK(cosx[2] == -0.5);

    CHECK_THROWS_AS(
        build_initial(basis, InitialCondition::single_mode({2, 5}, Phase::cosine, 1.0), 0),
        std::invalid_argument);

    const SpectralField r1 = build_initial(basis, InitialCondition::random_sobolev(2.0, 0.7), 42);
    CHECK(norm(basis, r1, 0.0) == doctest::Approx(0.7).epsilon(1e-12));
    const SpectralField r2 = build_initial(basis, InitialCondition::random_sobolev(2.0, 0.7), 42);
    for (int i = 0; i < 8; ++i) CHECK(r1[i] == r2[i]);
    const SpectralField r3 = build_initial(basis, InitialCondition::random_sobolev(2.0, 0.7), 43);
    CHECK(field_distance(r1, r3, 8) > 0.0);

    SpectralField big(16);
    for (int i = 0; i < 16; ++i) big[i] = 0.1 * (i + 1);
    const SpectralField proj = build_initial(basis, InitialCondition::from_field(big), 0);
    for (int i = 0; i < 8; ++i) CHECK(proj[i] == big[i]);

    SpectralField small(2);
    small[0] = 3.0;
    small[1] = -1.0;
    const SpectralField padded = build_initial(basis, InitialCondition::from_field(small), 0);
    CHECK(padded[1] == -1.0);
    for (int i = 2; i < 8; ++i) CHECK(padded[i] == 0.0);
}

TEST_CASE("ensemble mean is stable when the trajectory count doubles") {
    SolverConfig cfg = driven_config(32, 2e-3, 1.0, 29);
    cfg.noise.theta = 0.6;  // theta/alpha = 0.4: the sup summary keeps finite variance
    const EnsembleResult small = simulate_ensemble(cfg, 64, {1.0});
    const EnsembleResult big = simulate_ensemble(cfg, 128, {1.0});
    Welford ws, wb;
    for (const auto& s : small.summaries) ws.add(s.sup_at[0]);
    for (const auto& s : big.summaries) wb.add(s.sup_at[0]);
    CHECK(small.flagged == 0);
    CHECK(big.flagged == 0);
    CHECK(std::abs(wb.mean - ws.mean) < 2.0 * wb.se_mean());
}

}  // TEST_SUITE
