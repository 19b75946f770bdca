// levy-ns: batch front door for the stochastic Navier-Stokes toolkit.
//
// Subcommands: simulate, ensemble, moments, cf-test, invariant, sampler-test,
// plot-data, validate. Every run that produces files also writes a
// manifest.json naming them, keyed by the SHA-256 of the config text.
// Exit codes: 0 success, 2 config/schema validation failure, 3 blow-up-heavy
// run (flagged fraction above 1%), 1 anything else.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "levyns/config.hpp"
#include "levyns/diagnostics.hpp"
#include "levyns/invariant.hpp"
#include "levyns/manifest.hpp"
#include "levyns/snapshot.hpp"
#include "levyns/solver.hpp"

namespace fs = std::filesystem;
using namespace levyns;

namespace {

// ---- logging (LEVY_NS_LOG = quiet | info | debug) ---------------------------

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("LEVY_NS_LOG");
        if (!env) return 1;
        const std::string v = env;
        if (v == "quiet") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[levy-ns] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[levy-ns] %s\n", msg.c_str());
}

void log_error(const std::string& msg) { std::fprintf(stderr, "error: %s\n", msg.c_str()); }

// ---- shared options ----------------------------------------------------------

struct Common {
    std::string config_path;
    std::string out;  // directory, or a .csv path naming the primary artifact
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    int workers = 0;
};

// `-o report.csv` names the op's primary CSV; `-o results` is a directory
struct OutputLayout {
    fs::path dir;
    std::string primary;
};

OutputLayout resolve_out(const std::string& out_opt, const std::string& default_primary) {
    OutputLayout l;
    if (out_opt.size() > 4 && out_opt.substr(out_opt.size() - 4) == ".csv") {
        const fs::path p = out_opt;
        l.dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
        l.primary = p.filename().string();
    } else {
        l.dir = out_opt.empty() ? fs::path(".") : fs::path(out_opt);
        l.primary = default_primary;
    }
    fs::create_directories(l.dir);
    return l;
}

// manifest bookkeeping around one run
struct RunContext {
    OutputLayout out;
    RunManifest manifest;

    RunContext(const std::string& subcommand, const Common& c, const std::string& default_primary) {
        out = resolve_out(c.out, default_primary);
        manifest.subcommand = subcommand;
        manifest.started_at = utc_timestamp();
        manifest.seed_overridden = c.has_seed_override;
    }

    fs::path path_of(const std::string& name) const { return out.dir / name; }

    void add_output(const std::string& name) { manifest.outputs.push_back(name); }

    void finish(bool complete) {
        manifest.complete = complete;
        manifest.finished_at = utc_timestamp();
        write_manifest_atomic((out.dir / "manifest.json").string(), manifest);
        log_debug("manifest: " + (out.dir / "manifest.json").string());
    }
};

ConfigResult load_config_or_report(const Common& c, int& exit_code) {
    exit_code = 0;
    if (c.config_path.empty()) {
        log_error("--config is required for this subcommand");
        exit_code = 2;
        return {};
    }
    ConfigResult res;
    try {
        res = load_run_config_file(c.config_path);
    } catch (const std::exception& e) {
        log_error(e.what());
        exit_code = 2;
        return {};
    }
    for (const auto& w : res.warnings) log_info("warning: " + w);
    if (!res.valid()) {
        for (const auto& e : res.errors) log_error(e);
        exit_code = 2;
        return res;
    }
    if (c.has_seed_override) res.config.solver.seed = c.seed_override;
    return res;
}

void fill_manifest_header(RunContext& ctx, const ConfigResult& cr) {
    ctx.manifest.config_hash = cr.config.hash;
    ctx.manifest.seed = cr.config.solver.seed;
    ctx.manifest.h_theta_finite = cr.h_theta.finite;
    ctx.manifest.h_theta = cr.h_theta.value;
}

// ---- CSV helpers ---------------------------------------------------------------

class Csv {
  public:
    Csv(const fs::path& path, const std::string& header) : path_(path.string()), os_(path) {
        if (!os_) throw std::runtime_error("cannot open " + path_ + " for writing");
        os_ << header << "\n";
    }
    template <typename... Fields>
    void row(const Fields&... f) {
        bool first = true;
        ((os_ << (first ? "" : ",") << field(f), first = false), ...);
        os_ << "\n";
    }
    void close() {
        os_.flush();
        if (!os_) throw std::runtime_error("write to " + path_ + " failed");
        os_.close();
    }

  private:
    static std::string field(double v) { return format_double(v); }
    static std::string field(int v) { return std::to_string(v); }
    static std::string field(long long v) { return std::to_string(v); }
    static std::string field(std::uint64_t v) { return std::to_string(v); }
    static std::string field(const std::string& v) { return v; }
    static std::string field(const char* v) { return v; }

    std::string path_;
    std::ofstream os_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double_at(const std::string& tok, const std::string& file, long long line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw std::runtime_error(file + ":" + std::to_string(line) + ": cannot parse number \"" + tok + "\"");
    return v;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(text, ',')) {
        const auto p = split(item, ':');
        if (p.size() != 2) throw std::runtime_error("expected <s>:<t> pairs, got \"" + item + "\"");
        out.emplace_back(parse_double_at(p[0], "--pairs", 0), parse_double_at(p[1], "--pairs", 0));
    }
    return out;
}

std::string window_label(const Window& w) {
    return format_double(w.t_lo) + ":" + format_double(w.t_hi);
}

// ---- simulate -------------------------------------------------------------------

int run_simulate(const Common& common, const std::string& snapshots_dir) {
    int ec = 0;
    const ConfigResult cr = load_config_or_report(common, ec);
    if (ec) return ec;
    const SolverConfig& cfg = cr.config.solver;
    const Basis basis = Basis::build(cfg.n);
    const double theta = cfg.noise.theta;

    RunContext ctx("simulate", common, "trajectory.csv");
    fill_manifest_header(ctx, cr);
    ctx.manifest.trajectories = 1;
    const fs::path snap_dir = snapshots_dir.empty() ? ctx.out.dir : fs::path(snapshots_dir);
    fs::create_directories(snap_dir);

    // mirror per-step scalars through the callback so a blow-up still leaves
    // the partial trajectory on disk
    const SpectralField u0 = build_initial(basis, cfg.initial, cfg.seed);
    std::vector<StepScalars> scalars;
    scalars.push_back({0.0, norm(basis, u0, 0.0), norm(basis, u0, 1.0), f_theta(basis, u0, theta), 0});
    bool blew_up = false;
    long long blow_step = -1;
    TrajectoryRecord rec;
    try {
        rec = simulate(cfg, 0, [&](const StepView& v) {
            scalars.push_back({v.t1, norm(basis, v.after, 0.0), norm(basis, v.after, 1.0),
                               f_theta(basis, v.after, theta),
                               static_cast<int>(v.increment.big_jumps.size())});
        });
    } catch (const BlowUpError& e) {
        blew_up = true;
        blow_step = e.step_index;
        log_error("trajectory blew up at step " + std::to_string(e.step_index) + " (t = " +
                  format_double(e.time) + "); writing partial outputs");
    }

    {
        Csv csv(ctx.path_of(ctx.out.primary), "t,l2_norm,h1_norm,f_theta,big_jumps");
        const auto& rows = blew_up ? scalars : rec.scalars;
        for (const auto& s : rows) csv.row(s.t, s.l2_norm, s.h1_norm, s.f_theta, s.big_jumps);
        csv.close();
        ctx.add_output(ctx.out.primary);
    }

    int snaps = 0;
    const auto write_snap = [&](int index, double t, const SpectralField& u) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06d.field", index);
        const fs::path p = snap_dir / name;
        write_field_snapshot(p.string(), basis, u, theta, t);
        ctx.add_output(fs::relative(p, ctx.out.dir).string());
        ++snaps;
    };
    if (blew_up) {
        write_snap(0, 0.0, u0);  // the last fully finite recorded state
    } else {
        for (std::size_t i = 0; i < rec.snapshots.size(); ++i)
            write_snap(static_cast<int>(i), rec.snapshots[i].t, rec.snapshots[i].field);
    }

    ctx.manifest.flagged = blew_up ? 1 : 0;
    if (blew_up) ctx.manifest.summary["blow_up_step"] = static_cast<double>(blow_step);
    ctx.finish(!blew_up);
    log_info("trajectory: " + ctx.path_of(ctx.out.primary).string() + " (" +
             std::to_string(blew_up ? scalars.size() : rec.scalars.size()) + " rows, " +
             std::to_string(snaps) + " snapshots)");
    return blew_up ? 3 : 0;
}

// ---- ensemble ---------------------------------------------------------------------

int run_ensemble(const Common& common, int m_trajectories) {
    int ec = 0;
    const ConfigResult cr = load_config_or_report(common, ec);
    if (ec) return ec;
    const SolverConfig& cfg = cr.config.solver;

    RunContext ctx("ensemble", common, "ensemble.csv");
    fill_manifest_header(ctx, cr);

    const EnsembleResult ens = simulate_ensemble(cfg, m_trajectories, {}, common.workers);
    Csv csv(ctx.path_of(ctx.out.primary),
            "traj,flagged,blow_up_step,big_jumps,sup_theta,integral,grad_theta");
    for (const auto& s : ens.summaries)
        csv.row(s.traj, s.flagged ? 1 : 0, s.blow_up_step, s.big_jump_count, s.sup_at.back(),
                s.integral_at.back(), s.grad_theta_at.back());
    csv.close();
    ctx.add_output(ctx.out.primary);

    ctx.manifest.trajectories = m_trajectories;
    ctx.manifest.flagged = ens.flagged;
    ctx.finish(true);
    const bool heavy = ens.flagged > 0.01 * m_trajectories;
    log_info("ensemble: " + std::to_string(m_trajectories) + " trajectories, " +
             std::to_string(ens.flagged) + " flagged");
    if (heavy) log_error("flagged fraction above 1%");
    return heavy ? 3 : 0;
}

// ---- moments -----------------------------------------------------------------------

int run_moments(const Common& common, int m_opt, const std::vector<double>& horizons_opt) {
    int ec = 0;
    const ConfigResult cr = load_config_or_report(common, ec);
    if (ec) return ec;
    const SolverConfig& cfg = cr.config.solver;
    const int m = m_opt > 0 ? m_opt : cr.config.moment_trajectories;
    const std::vector<double> horizons = horizons_opt.empty() ? cr.config.horizons : horizons_opt;

    RunContext ctx("moments", common, "report.csv");
    fill_manifest_header(ctx, cr);

    const Basis basis = Basis::build(cfg.n);
    const double phi_l2 = norm(basis, build_initial(basis, cfg.initial, cfg.seed), 0.0);
    const EnsembleResult ens = simulate_ensemble(cfg, m, horizons, common.workers);
    const MomentReport rep = moment_bound_report(ens, cfg.noise.theta, phi_l2);
    const GradientMomentReport grad =
        gradient_moment_report(ens, cfg.noise.theta, phi_l2, basis.lambda_min(), rep.c_hat);

    Csv csv(ctx.path_of(ctx.out.primary),
            "t,sup_mean,sup_se,integral_mean,integral_se,lhs_mean,lhs_se,c_hat_at,c_hat_se,"
            "grad_mean,grad_se");
    for (std::size_t k = 0; k < rep.horizons.size(); ++k)
        csv.row(rep.horizons[k], rep.sup_mean[k], rep.sup_se[k], rep.integral_mean[k],
                rep.integral_se[k], rep.lhs_mean[k], rep.lhs_se[k], rep.c_hat_at[k],
                rep.c_hat_se[k], grad.mean[k], grad.se[k]);
    csv.close();
    ctx.add_output(ctx.out.primary);

    ctx.manifest.trajectories = m;
    ctx.manifest.flagged = ens.flagged;
    auto& s = ctx.manifest.summary;
    s["c_hat"] = rep.c_hat;
    s["c_hat_half"] = rep.c_hat_half;
    s["fit_intercept"] = rep.fit_intercept;
    s["fit_slope"] = rep.fit_slope;
    s["stable_in_t"] = rep.stable_in_t ? 1.0 : 0.0;
    s["stable_in_m"] = rep.stable_in_m ? 1.0 : 0.0;
    s["reliable"] = rep.reliable ? 1.0 : 0.0;
    s["c_prime"] = grad.c_prime;
    s["grad_within_envelope"] = grad.within_envelope ? 1.0 : 0.0;
    s["grad_affine_in_t"] = grad.affine_in_t ? 1.0 : 0.0;
    ctx.finish(true);

    std::ostringstream msg;
    msg << "moments: C_hat = " << format_double(rep.c_hat) << " (half-M " << format_double(rep.c_hat_half)
        << "), lhs fit " << format_double(rep.fit_intercept) << " + " << format_double(rep.fit_slope)
        << " t, stable_in_t=" << rep.stable_in_t << " stable_in_m=" << rep.stable_in_m
        << ", gradient C' = " << format_double(grad.c_prime) << " affine=" << grad.affine_in_t
        << ", flagged " << ens.flagged << "/" << m;
    log_info(msg.str());
    const bool heavy = ens.flagged > 0.01 * m;
    if (heavy) log_error("flagged fraction above 1%");
    return heavy ? 3 : 0;
}

// ---- cf-test -----------------------------------------------------------------------

int run_cf_test(const Common& common, int mode_opt, const std::vector<double>& xi_opt,
                const std::string& pairs_opt, int m_opt) {
    int ec = 0;
    const ConfigResult cr = load_config_or_report(common, ec);
    if (ec) return ec;
    const int mode = mode_opt > 0 ? mode_opt : cr.config.cf_mode;
    const std::vector<double> xi = xi_opt.empty() ? cr.config.cf_xi : xi_opt;
    const auto pairs = pairs_opt.empty() ? cr.config.cf_pairs : parse_pairs(pairs_opt);
    const int m = m_opt > 0 ? m_opt : cr.config.cf_trajectories;

    RunContext ctx("cf-test", common, "cf.csv");
    fill_manifest_header(ctx, cr);

    const CharFunReport rep = martingale_cf_test(cr.config.solver, mode, xi, pairs, m, common.workers);

    Csv csv(ctx.path_of(ctx.out.primary),
            "mode,xi,s,t,emp_re,emp_im,se_re,se_im,theory_re,theory_im,z");
    for (const auto& p : rep.points)
        csv.row(rep.mode, p.xi, p.s, p.t, p.empirical.real(), p.empirical.imag(), p.se_re, p.se_im,
                p.theory.real(), p.theory.imag(), p.z);
    csv.close();
    ctx.add_output(ctx.out.primary);

    const int flagged = m - rep.trajectories;
    ctx.manifest.trajectories = m;
    ctx.manifest.flagged = flagged;
    ctx.manifest.summary["pass_fraction"] = rep.pass_fraction;
    ctx.manifest.summary["pass"] = rep.pass ? 1.0 : 0.0;
    ctx.finish(true);

    log_info("cf-test: mode " + std::to_string(rep.mode) + ", " + std::to_string(rep.points.size()) +
             " grid points, pass fraction " + format_double(rep.pass_fraction) +
             (rep.pass ? " -> PASS" : " -> FAIL"));
    const bool heavy = flagged > 0.01 * m;
    if (heavy) log_error("flagged fraction above 1%");
    return heavy ? 3 : 0;
}

// ---- invariant ---------------------------------------------------------------------

int run_invariant(const Common& common, int m_opt, double burn_opt, long long stride_opt,
                  const std::string& windows_opt, const std::string& observables_opt) {
    int ec = 0;
    const ConfigResult cr = load_config_or_report(common, ec);
    if (ec) return ec;
    const SolverConfig& cfg = cr.config.solver;
    const int m = m_opt > 0 ? m_opt : cr.config.invariant_trajectories;
    const double burn = std::isnan(burn_opt) ? cr.config.burn_in : burn_opt;
    const long long stride = stride_opt >= 0 ? stride_opt : cr.config.stride;

    std::vector<Window> windows = cr.config.windows;
    if (!windows_opt.empty()) {
        windows.clear();
        for (const auto& r : parse_pairs(windows_opt)) windows.push_back(Window{r.first, r.second});
    }
    std::vector<ObservableSpec> observables = cr.config.observables;
    if (!observables_opt.empty()) {
        observables.clear();
        for (const auto& tok : split(observables_opt, ','))
            observables.push_back(ObservableSpec::parse(tok));
    }

    RunContext ctx("invariant", common, "measure.csv");
    fill_manifest_header(ctx, cr);

    const EmpiricalMeasure kb =
        kb_estimate(cfg, observables, burn, stride, m, windows, common.workers);

    Csv csv(ctx.path_of(ctx.out.primary), "observable,bin_lo,bin_hi,mass,window");
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t oi = 0; oi < kb.observables.size(); ++oi) {
        for (std::size_t wi = 0; wi < kb.windows.size(); ++wi) {
            const ObservableMeasure& om = kb.measures[oi][wi];
            const std::string obs = om.spec.name();
            const std::string win = window_label(om.window);
            csv.row(obs, -inf, om.hist.lo, om.hist.underflow, win);
            for (int b = 0; b < om.hist.bins; ++b)
                csv.row(obs, om.hist.bin_lo(b), om.hist.bin_hi(b), om.hist.mass[b], win);
            csv.row(obs, om.hist.hi, inf, om.hist.overflow, win);
        }
    }
    csv.close();
    ctx.add_output(ctx.out.primary);

    ctx.manifest.trajectories = m;
    ctx.manifest.flagged = kb.flagged;
    ctx.manifest.summary["stride"] = static_cast<double>(kb.stride);
    ctx.manifest.summary["burn_in"] = kb.burn_in;
    for (std::size_t oi = 0; oi < kb.observables.size(); ++oi) {
        const ObservableMeasure& om = kb.measures[oi][0];
        std::ostringstream msg;
        msg << "invariant: " << om.spec.name() << " mean " << format_double(om.mean) << " +- "
            << format_double(om.se) << " (" << om.samples << " samples"
            << (om.underpowered ? ", underpowered" : "") << ")";
        log_info(msg.str());
    }

    bool all_stationary = true;
    if (kb.windows.size() >= 2) {
        for (std::size_t w = 0; w + 1 < kb.windows.size(); ++w) {
            const StationarityReport st = window_stationarity_test(kb, w, w + 1, 200, cfg.seed);
            all_stationary = all_stationary && st.stationary;
            for (const auto& r : st.results) {
                std::ostringstream msg;
                msg << "stationarity [" << window_label(kb.windows[w]) << "] vs ["
                    << window_label(kb.windows[w + 1]) << "] " << r.observable << ": D = "
                    << format_double(r.ks.d) << ", p = " << format_double(r.ks.p_permutation)
                    << (r.underpowered ? " (underpowered)" : "");
                log_info(msg.str());
            }
            log_info(std::string("stationarity verdict: ") + (st.stationary ? "PASS" : "FAIL") +
                     " at 1%");
        }
        ctx.manifest.summary["stationary"] = all_stationary ? 1.0 : 0.0;
    }
    ctx.finish(true);

    const bool heavy = kb.flagged > 0.01 * m;
    if (heavy) log_error("flagged fraction above 1%");
    return heavy ? 3 : 0;
}

// ---- sampler-test ------------------------------------------------------------------

int run_sampler_test(const Common& common, double alpha, long long n_draws, double scale) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        log_error("--alpha must lie in (0,2)");
        return 2;
    }
    if (n_draws < 1000) {
        log_error("-N must be at least 1000");
        return 2;
    }
    RunContext ctx("sampler-test", common, "sampler.csv");
    ctx.manifest.seed = common.has_seed_override ? common.seed_override : 0;

    CounterRng rng = make_rng(ctx.manifest.seed, StreamPurpose::sampler);
    std::vector<double> abs_draws(static_cast<std::size_t>(n_draws));
    long long positive = 0;
    for (auto& v : abs_draws) {
        const double x = sample_stable(alpha, scale, rng);
        if (x > 0.0) ++positive;
        v = std::abs(x);
    }
    std::sort(abs_draws.begin(), abs_draws.end(), std::greater<>());

    // tolerances are pinned at N = 1e6 and widen as 1/sqrt(N) below it
    const double widen = std::sqrt(std::max(1.0, 1e6 / static_cast<double>(n_draws)));
    struct Check {
        std::string name;
        double value, expected, tol;
        bool pass;
    };
    std::vector<Check> checks;
    const double pos_frac = static_cast<double>(positive) / static_cast<double>(n_draws);
    checks.push_back({"positive_fraction", pos_frac, 0.5, 0.002 * widen,
                      std::abs(pos_frac - 0.5) <= 0.002 * widen});
    if (std::abs(alpha - 1.0) < 1e-12) {
        // |Cauchy| has median tan(pi/4) = 1 (times the scale)
        const std::size_t mid = abs_draws.size() / 2;
        const double median = abs_draws.size() % 2 == 1
                                  ? abs_draws[mid]
                                  : 0.5 * (abs_draws[mid - 1] + abs_draws[mid]);
        checks.push_back({"median_abs", median, scale, 0.01 * scale * widen,
                          std::abs(median - scale) <= 0.01 * scale * widen});
    }
    const double hill = hill_auto(abs_draws);
    checks.push_back({"hill_tail_index", hill, alpha, 0.05 * widen,
                      std::abs(hill - alpha) <= 0.05 * widen});

    Csv csv(ctx.path_of(ctx.out.primary), "statistic,value,expected,tolerance,pass");
    bool all_pass = true;
    for (const auto& c : checks) {
        csv.row(c.name, c.value, c.expected, c.tol, c.pass ? 1 : 0);
        all_pass = all_pass && c.pass;
        log_info("sampler-test: " + c.name + " = " + format_double(c.value) + " (expected " +
                 format_double(c.expected) + " +- " + format_double(c.tol) + ") -> " +
                 (c.pass ? "PASS" : "FAIL"));
    }
    csv.close();
    ctx.add_output(ctx.out.primary);
    ctx.manifest.summary["alpha"] = alpha;
    ctx.manifest.summary["n_draws"] = static_cast<double>(n_draws);
    ctx.manifest.summary["all_pass"] = all_pass ? 1.0 : 0.0;
    ctx.finish(true);
    return all_pass ? 0 : 1;
}

// ---- plot-data ---------------------------------------------------------------------

// reads one of this tool's CSVs back; header and every row are checked and
// mismatches name the file and line
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expected_header) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ":1: empty file");
    if (line != expected_header)
        throw std::runtime_error(path + ":1: header \"" + line + "\" does not match \"" +
                                 expected_header + "\"");
    const std::size_t cols = split(expected_header, ',').size();
    std::vector<std::vector<std::string>> rows;
    long long ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != cols)
            throw std::runtime_error(path + ":" + std::to_string(ln) + ": expected " +
                                     std::to_string(cols) + " fields, got " +
                                     std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

int run_plot_data(const Common& common, const std::string& moments_path,
                  const std::string& cf_path, const std::string& measure_path) {
    RunContext ctx("plot-data", common, "plot.csv");
    try {
        Csv csv(ctx.path_of(ctx.out.primary), "series,x,y,yerr");

        if (!moments_path.empty()) {
            const auto rows = read_csv(moments_path,
                                       "t,sup_mean,sup_se,integral_mean,integral_se,lhs_mean,"
                                       "lhs_se,c_hat_at,c_hat_se,grad_mean,grad_se");
            long long ln = 1;
            for (const auto& r : rows) {
                ++ln;
                const double t = parse_double_at(r[0], moments_path, ln);
                csv.row("sup_term", t, parse_double_at(r[1], moments_path, ln),
                        parse_double_at(r[2], moments_path, ln));
            }
            ln = 1;
            for (const auto& r : rows) {
                ++ln;
                const double t = parse_double_at(r[0], moments_path, ln);
                csv.row("integral_term", t, parse_double_at(r[3], moments_path, ln),
                        parse_double_at(r[4], moments_path, ln));
            }
        }

        if (!cf_path.empty()) {
            const auto rows =
                read_csv(cf_path, "mode,xi,s,t,emp_re,emp_im,se_re,se_im,theory_re,theory_im,z");
            long long ln = 1;
            for (const auto& r : rows) {
                ++ln;
                const std::string xi = r[1];
                const double t = parse_double_at(r[3], cf_path, ln);
                csv.row("cf_re_emp@xi=" + xi, t, parse_double_at(r[4], cf_path, ln),
                        parse_double_at(r[6], cf_path, ln));
                csv.row("cf_re_theory@xi=" + xi, t, parse_double_at(r[8], cf_path, ln), 0.0);
                csv.row("cf_im_emp@xi=" + xi, t, parse_double_at(r[5], cf_path, ln),
                        parse_double_at(r[7], cf_path, ln));
                csv.row("cf_im_theory@xi=" + xi, t, parse_double_at(r[9], cf_path, ln), 0.0);
            }
        }

        if (!measure_path.empty()) {
            const auto rows = read_csv(measure_path, "observable,bin_lo,bin_hi,mass,window");
            long long ln = 1;
            for (const auto& r : rows) {
                ++ln;
                const double lo = parse_double_at(r[1], measure_path, ln);
                const double hi = parse_double_at(r[2], measure_path, ln);
                if (!std::isfinite(lo) || !std::isfinite(hi)) continue;  // under/overflow rows
                csv.row(r[0] + "@" + r[4], 0.5 * (lo + hi),
                        parse_double_at(r[3], measure_path, ln), 0.0);
            }
        }

        csv.close();
    } catch (const std::exception& e) {
        log_error(e.what());
        ctx.finish(false);
        return 2;
    }
    ctx.add_output(ctx.out.primary);
    ctx.finish(true);
    log_info("plot-data: " + ctx.path_of(ctx.out.primary).string());
    return 0;
}

// ---- validate ----------------------------------------------------------------------

int run_validate(const Common& common) {
    if (common.config_path.empty()) {
        log_error("--config is required");
        return 2;
    }
    ConfigResult res;
    try {
        res = load_run_config_file(common.config_path);
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
    for (const auto& w : res.warnings) log_info("warning: " + w);
    if (!res.valid()) {
        for (const auto& e : res.errors) log_error(e);
        return 2;
    }
    const SolverConfig& sc = res.config.solver;
    std::cout << "config_hash: " << res.config.hash << "\n"
              << "n: " << sc.n << "\n"
              << "dt: " << format_double(sc.dt) << "\n"
              << "T: " << format_double(sc.horizon) << "\n"
              << "scheme: "
              << (sc.scheme == Scheme::exponential_euler ? "exponential-euler"
                                                         : "semi-implicit-euler")
              << "\n"
              << "seed: " << sc.seed << "\n"
              << "noise: " << (sc.noise_off ? "off" : "on") << "\n";
    if (!sc.noise_off) {
        std::cout << "alpha: " << format_double(sc.noise.measure.alpha) << "\n"
                  << "theta: " << format_double(sc.noise.theta) << "\n"
                  << "H_theta: " << format_double(res.h_theta.value) << "\n";
    }
    std::cout << "valid: yes\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin simulator for stochastic 2D Navier-Stokes on the torus "
                 "driven by cylindrical alpha-stable noise"};
    app.require_subcommand(1);

    Common common;
    app.add_option("--config", common.config_path, "run configuration file");
    app.add_option("-o,--out-dir", common.out,
                   "output directory, or a .csv path naming the primary artifact");
    auto* seed_opt =
        app.add_option("--seed-override", common.seed_override, "replace the config seed");
    app.add_option("--workers", common.workers, "ensemble worker threads (0 = all available)");

    auto* sim = app.add_subcommand("simulate", "one trajectory: trajectory.csv plus snapshots");
    std::string snapshots_dir;
    sim->add_option("--snapshots-dir", snapshots_dir, "directory for snapshot files");

    auto* ens = app.add_subcommand("ensemble", "per-trajectory summary table");
    int ens_m = 64;
    ens->add_option("-M,--trajectories", ens_m, "trajectory count");

    auto* mom = app.add_subcommand("moments", "moment-bound estimator report");
    int mom_m = 0;
    std::vector<double> mom_horizons;
    mom->add_option("-M,--trajectories", mom_m, "trajectory count (default: config)");
    mom->add_option("--horizons", mom_horizons, "report horizons (default: config)")
        ->delimiter(',');

    auto* cft = app.add_subcommand("cf-test", "martingale characteristic-function test");
    int cf_mode = 0, cf_m = 0;
    std::vector<double> cf_xi;
    std::string cf_pairs;
    cft->add_option("--mode", cf_mode, "basis mode j (default: config)");
    cft->add_option("--xi", cf_xi, "xi grid (default: config)")->delimiter(',');
    cft->add_option("--pairs", cf_pairs, "time pairs s:t,s:t,... (default: config)");
    cft->add_option("-M,--trajectories", cf_m, "trajectory count (default: config)");

    auto* inv = app.add_subcommand("invariant", "time-averaged empirical measures");
    int inv_m = 0;
    double inv_burn = std::nan("");
    long long inv_stride = -1;
    std::string inv_windows, inv_observables;
    inv->add_option("-M,--trajectories", inv_m, "trajectory count (default: config)");
    inv->add_option("--burn-in", inv_burn, "burn-in time (default: config, then T/2)");
    inv->add_option("--stride", inv_stride, "sampling stride in steps (0 = adaptive)");
    inv->add_option("--windows", inv_windows, "time windows a:b,c:d (default: config)");
    inv->add_option("--observables", inv_observables,
                    "observables l2,h1theta,ftheta,mode:j,band:m1:m2 (default: config)");

    auto* smp = app.add_subcommand("sampler-test", "stable sampler sanity report");
    double smp_alpha = 1.0, smp_scale = 1.0;
    long long smp_n = 1000000;
    smp->add_option("--alpha", smp_alpha, "stability index in (0,2)")->required();
    smp->add_option("-N,--draws", smp_n, "draw count");
    smp->add_option("--scale", smp_scale, "scale parameter");

    auto* plt = app.add_subcommand("plot-data", "normalize reports into series,x,y,yerr");
    std::string plt_moments, plt_cf, plt_measure;
    plt->add_option("--moments", plt_moments, "moments report.csv");
    plt->add_option("--cf", plt_cf, "cf-test cf.csv");
    plt->add_option("--measure", plt_measure, "invariant measure.csv");

    auto* val = app.add_subcommand("validate", "check a config and report H_theta");

    for (auto* sub : {sim, ens, mom, cft, inv, smp, plt, val}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    common.has_seed_override = seed_opt->count() > 0;

    try {
        if (sim->parsed()) return run_simulate(common, snapshots_dir);
        if (ens->parsed()) return run_ensemble(common, ens_m);
        if (mom->parsed()) return run_moments(common, mom_m, mom_horizons);
        if (cft->parsed()) return run_cf_test(common, cf_mode, cf_xi, cf_pairs, cf_m);
        if (inv->parsed()) return run_invariant(common, inv_m, inv_burn, inv_stride, inv_windows,
                                                inv_observables);
        if (smp->parsed()) return run_sampler_test(common, smp_alpha, smp_n, smp_scale);
        if (plt->parsed()) return run_plot_data(common, plt_moments, plt_cf, plt_measure);
        if (val->parsed()) return run_validate(common);
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 1;
    }
    return 0;
}
