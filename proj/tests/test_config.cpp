#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "levyns/config.hpp"
#include "levyns/manifest.hpp"
#include "levyns/snapshot.hpp"

using namespace levyns;
namespace fs = std::filesystem;

namespace {

bool has_error(const ConfigResult& r, const std::string& needle) {
    for (const auto& e : r.errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("sha256 matches the FIPS 180-2 vectors") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("the full grammar maps onto the solver config") {
    const std::string text =
        "# exhaustive example\n"
        "[spectral]\n"
        "n = 12\n"
        "\n"
        "[noise]\n"
        "enabled = on\n"
        "family = truncated-stable\n"
        "alpha = 1.2\n"
        "intensity = 0.5\n"
        "truncation = 10\n"
        "beta_rule = list:1,0.25,0.125,0.1,0.05,0.04,0.03,0.02,0.01,0.009,0.008,0.007\n"
        "theta = 0.8\n"
        "backend = levy-ito\n"
        "small_jump_cutoff = 0.01\n"
        "\n"
        "[solver]\n"
        "dt = 0.002\n"
        "T = 3\n"
        "scheme = semi-implicit-euler\n"
        "initial = single-mode:1:1:s:2.5\n"
        "seed = 31415\n"
        "snapshot_stride = 50\n"
        "\n"
        "[diagnostics]\n"
        "horizons = 1,2,3\n"
        "trajectories = 32\n"
        "mode = 2\n"
        "xi = 0.25,0.75\n"
        "pairs = 0:1,1:2\n"
        "cf_trajectories = 500\n"
        "\n"
        "[invariant]\n"
        "burn_in = 1.5\n"
        "stride = 20\n"
        "trajectories = 48\n"
        "windows = 1.5:2,2:3\n"
        "observables = l2,h1theta,ftheta,mode:2,band:3:5\n";
    const ConfigResult r = load_run_config(text);
    for (const auto& e : r.errors) CAPTURE(e);
    REQUIRE(r.valid());
    CHECK(r.config.text == text);
    CHECK(r.config.hash == sha256_hex(text));

    const SolverConfig& sc = r.config.solver;
    CHECK(sc.n == 12);
    CHECK_FALSE(sc.noise_off);
    CHECK(sc.noise.measure.family == LevyFamily::truncated_stable);
    CHECK(sc.noise.measure.alpha == 1.2);
    CHECK(sc.noise.measure.intensity == 0.5);
    CHECK(sc.noise.measure.r_trunc == 10.0);
    CHECK(sc.noise.betas.rule == CoefficientSequence::Rule::list);
    REQUIRE(sc.noise.betas.values.size() == 12);
    CHECK(sc.noise.betas.beta(2) == 0.25);
    CHECK(sc.noise.theta == 0.8);
    CHECK(sc.noise_settings.backend == NoiseBackend::levy_ito);
    CHECK(sc.noise_settings.small_jump_cutoff == 0.01);
    CHECK(sc.dt == 0.002);
    CHECK(sc.horizon == 3.0);
    CHECK(sc.scheme == Scheme::semi_implicit_euler);
    CHECK(sc.initial.kind == InitialCondition::Kind::single_mode);
    CHECK(sc.initial.wave.kx == 1);
    CHECK(sc.initial.wave.ky == 1);
    CHECK(sc.initial.phase == Phase::sine);
    CHECK(sc.initial.amplitude == 2.5);
    CHECK(sc.seed == 31415);
    CHECK(sc.snapshot_stride == 50);

    CHECK(r.config.horizons == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(r.config.moment_trajectories == 32);
    CHECK(r.config.cf_mode == 2);
    CHECK(r.config.cf_xi == std::vector<double>{0.25, 0.75});
    REQUIRE(r.config.cf_pairs.size() == 2);
    CHECK(r.config.cf_pairs[1].second == 2.0);
    CHECK(r.config.cf_trajectories == 500);
    CHECK(r.config.burn_in == 1.5);
    CHECK(r.config.stride == 20);
    CHECK(r.config.invariant_trajectories == 48);
    REQUIRE(r.config.windows.size() == 2);
    CHECK(r.config.windows[0].t_lo == 1.5);
    CHECK(r.config.windows[1].t_hi == 3.0);
    REQUIRE(r.config.observables.size() == 5);
    CHECK(r.config.observables[3].name() == "mode:2");
    CHECK(r.config.observables[4].name() == "band:3:5");

    // truncated measure with R=10: H_theta is finite for theta > alpha too,
    // but here theta < alpha; just require the evaluation ran
    CHECK(r.h_theta.finite);
}

TEST_CASE("an empty config is valid with documented defaults") {
    const ConfigResult r = load_run_config("");
    REQUIRE(r.valid());
    const SolverConfig& sc = r.config.solver;
    CHECK(sc.n == 8);
    CHECK(sc.dt == 1e-3);
    CHECK(sc.horizon == 1.0);
    CHECK(sc.scheme == Scheme::exponential_euler);
    CHECK_FALSE(sc.noise_off);
    CHECK(sc.noise.measure.alpha == 1.5);
    CHECK(sc.noise.theta == 1.0);
    // alpha 3/2, theta 1, c 1, beta_j = j^-2:
    //   big-jump term 2c/(alpha-theta) = 4, series zeta(2) = pi^2/6
    CHECK(r.h_theta.finite);
    CHECK(r.h_theta.value == doctest::Approx(4.0 + M_PI * M_PI / 6.0).epsilon(1e-14));
    CHECK(r.h_theta.value == doctest::Approx(5.644934066848227).epsilon(1e-14));
}

TEST_CASE("syntax errors aggregate with line numbers") {
    const std::string text =
        "[solver\n"          // line 1: malformed section
        "dt = 1e-3\n"        // line 2: key outside any section (header failed)
        "[solver]\n"
        "just words\n"       // line 4: no equals sign
        "dt = 1e-3\n"
        "dt = 2e-3\n";       // line 6: duplicate
    const ConfigResult r = load_run_config(text);
    CHECK_FALSE(r.valid());
    CHECK(has_error(r, "line 1: malformed section header"));
    CHECK(has_error(r, "line 2: key outside any [section]"));
    CHECK(has_error(r, "line 4: expected key = value"));
    CHECK(has_error(r, "line 6: duplicate key solver.dt"));
    CHECK(has_error(r, "first set on line 5"));
}

TEST_CASE("unknown sections and keys are named") {
    const ConfigResult r = load_run_config("[solvr]\ndt = 1\n[solver]\ndtt = 1\nT = 1\ndt = 1\n");
    CHECK_FALSE(r.valid());
    CHECK(has_error(r, "unknown section [solvr]"));
    CHECK(has_error(r, "unknown key solver.dtt (line 4)"));
}

TEST_CASE("typed value errors carry section.key and the line") {
    const std::string text =
        "[solver]\n"
        "dt = fast\n"
        "scheme = rk4\n"
        "initial = single-mode:1\n"
        "T = 1\n"
        "[noise]\n"
        "beta_rule = geometric:2\n"
        "[invariant]\n"
        "windows = 4-8\n"
        "observables = l2,bogus\n";
    const ConfigResult r = load_run_config(text);
    CHECK_FALSE(r.valid());
    CHECK(has_error(r, "solver.dt (line 2): cannot parse real number \"fast\""));
    CHECK(has_error(r, "solver.scheme (line 3): expected exponential-euler or semi-implicit-euler"));
    CHECK(has_error(r, "solver.initial (line 4): expected single-mode:<kx>:<ky>:<c|s>:<amp>"));
    CHECK(has_error(r, "noise.beta_rule (line 7): expected power:<r> or list:"));
    CHECK(has_error(r, "invariant.windows (line 9): expected <a>:<b>"));
    CHECK(has_error(r, "invariant.observables (line 10)"));
    CHECK(has_error(r, "unknown observable \"bogus\""));
}

TEST_CASE("solver-level violations aggregate through the config gate") {
    const std::string text =
        "[spectral]\n"
        "n = 0\n"
        "[solver]\n"
        "dt = 1e-3\n"
        "T = 0.0015\n"      // not a step multiple
        "[noise]\n"
        "theta = 1.5\n";
    const ConfigResult r = load_run_config(text);
    CHECK_FALSE(r.valid());
    CHECK(has_error(r, "spectral.n must be at least 1"));
    CHECK(has_error(r, "solver.T must be an integer multiple of dt"));
    CHECK(has_error(r, "noise.theta must lie in (0,1]"));
    CHECK(r.errors.size() >= 3);
}

TEST_CASE("the H_theta hypothesis gates untruncated configs") {
    SUBCASE("theta >= alpha diverges") {
        const ConfigResult r = load_run_config("[noise]\nalpha = 0.8\ntheta = 1\n");
        CHECK_FALSE(r.valid());
        CHECK(has_error(r, "noise: H_theta diverges"));
        CHECK(has_error(r, "theta >= alpha"));
        CHECK_FALSE(r.h_theta.finite);
    }
    SUBCASE("slowly decaying coefficients diverge") {
        const ConfigResult r =
            load_run_config("[noise]\nalpha = 1.5\ntheta = 1\nbeta_rule = power:0.5\n");
        CHECK_FALSE(r.valid());
        CHECK(has_error(r, "H_theta diverges"));
        CHECK(has_error(r, "coefficient series diverges"));
    }
    SUBCASE("the truncated family tolerates theta >= alpha") {
        const ConfigResult r = load_run_config(
            "[noise]\nfamily = truncated-stable\nalpha = 0.8\ntheta = 1\ntruncation = 5\n"
            "backend = levy-ito\n");
        for (const auto& e : r.errors) CAPTURE(e);
        CHECK(r.valid());
        CHECK(r.h_theta.finite);
    }
}

TEST_CASE("semi-implicit step-size warning fires past 0.5/lambda_n") {
    const std::string base =
        "[spectral]\nn = 32\n[solver]\nscheme = semi-implicit-euler\nT = 1\n";
    // lambda_32 = 4 pi^2 * 10, threshold 0.5/lambda ~ 1.2665e-3
    const ConfigResult warn = load_run_config(base + "dt = 2e-3\n");
    REQUIRE(warn.valid());
    REQUIRE(warn.warnings.size() == 1);
    CHECK(warn.warnings[0].find("0.5/lambda_n") != std::string::npos);

    const ConfigResult quiet = load_run_config(base + "dt = 1e-3\n");
    CHECK(quiet.valid());
    CHECK(quiet.warnings.empty());

    // exponential-euler integrates the stiff part exactly; no warning
    const ConfigResult expo =
        load_run_config("[spectral]\nn = 32\n[solver]\nT = 1\ndt = 2e-3\n");
    CHECK(expo.valid());
    CHECK(expo.warnings.empty());
}

TEST_CASE("a snapshot file re-enters through initial = field:<path>") {
    const fs::path dir = fs::temp_directory_path() / "levyns_config_test";
    fs::create_directories(dir);
    const std::string snap_path = (dir / "state.field").string();

    const Basis b8 = Basis::build(8);
    SpectralField u(8);
    for (int i = 0; i < 8; ++i) u[i] = 0.25 * (i + 1);
    write_field_snapshot(snap_path, b8, u, 1.0, 4.0);

    const ConfigResult r = load_run_config("[solver]\nT = 1\ninitial = field:" + snap_path + "\n");
    REQUIRE(r.valid());
    CHECK(r.config.solver.initial.kind == InitialCondition::Kind::explicit_field);
    REQUIRE(r.config.solver.initial.field.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(r.config.solver.initial.field[i] == u[i]);

    const ConfigResult missing =
        load_run_config("[solver]\nT = 1\ninitial = field:/nonexistent/x.field\n");
    CHECK_FALSE(missing.valid());
    CHECK(has_error(missing, "solver.initial"));
    CHECK(has_error(missing, "cannot open"));

    fs::remove_all(dir);
}

TEST_CASE("load_run_config_file hashes the exact bytes") {
    const fs::path dir = fs::temp_directory_path() / "levyns_config_file_test";
    fs::create_directories(dir);
    const std::string path = (dir / "run.cfg").string();
    const std::string text = "[solver]\ndt = 1e-3\nT = 0.5\nseed = 9\n";
    {
        std::ofstream os(path, std::ios::binary);
        os << text;
    }
    const ConfigResult r = load_run_config_file(path);
    REQUIRE(r.valid());
    CHECK(r.config.text == text);
    CHECK(r.config.hash == sha256_hex(text));
    CHECK(r.config.solver.seed == 9);

    CHECK_THROWS_WITH_AS(load_run_config_file((dir / "absent.cfg").string()),
                         doctest::Contains("cannot open"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("manifest round trip through the atomic writer") {
    const fs::path dir = fs::temp_directory_path() / "levyns_manifest_test";
    fs::create_directories(dir);
    const std::string path = (dir / "manifest.json").string();

    RunManifest m;
    m.subcommand = "moments";
    m.config_hash = sha256_hex("x");
    m.seed = 42;
    m.seed_overridden = true;
    m.started_at = "2026-01-02T03:04:05Z";
    m.finished_at = "2026-01-02T03:05:06Z";
    m.outputs = {"report.csv", "snapshot_000000.field"};
    m.trajectories = 256;
    m.flagged = 1;
    m.complete = true;
    m.h_theta_finite = true;
    m.h_theta = 5.644934066848227;
    m.summary["c_hat"] = 1.25;

    write_manifest_atomic(path, m);
    CHECK_FALSE(fs::exists(path + ".tmp"));  // temp file renamed away

    const RunManifest r = read_manifest(path);
    CHECK(r.tool_version == std::string(kToolVersion));
    CHECK(r.subcommand == m.subcommand);
    CHECK(r.config_hash == m.config_hash);
    CHECK(r.seed == m.seed);
    CHECK(r.seed_overridden == m.seed_overridden);
    CHECK(r.started_at == m.started_at);
    CHECK(r.finished_at == m.finished_at);
    CHECK(r.outputs == m.outputs);
    CHECK(r.trajectories == m.trajectories);
    CHECK(r.flagged == m.flagged);
    CHECK(r.complete == m.complete);
    CHECK(r.h_theta_finite == m.h_theta_finite);
    CHECK(r.h_theta == m.h_theta);
    CHECK(r.summary.at("c_hat") == 1.25);

    fs::remove_all(dir);
}

TEST_CASE("values tolerate surrounding whitespace and comments") {
    const ConfigResult r = load_run_config(
        "  # indented comment\n"
        "  [solver]  \n"
        "   dt   =   1e-3  \n"
        "T = 1\n"
        "\n"
        "[diagnostics]\n"
        "horizons = 0.5 , 1 \n");
    REQUIRE(r.valid());
    CHECK(r.config.solver.dt == 1e-3);
    CHECK(r.config.horizons == std::vector<double>{0.5, 1.0});
}

}  // TEST_SUITE
