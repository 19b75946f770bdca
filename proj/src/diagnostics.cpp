#include "levyns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levyns/stats.hpp"

namespace levyns {

double f_theta(const Basis& basis, const SpectralField& u, double theta) {
    const double r = norm(basis, u, 0.0);
    return std::pow(r * r + 1.0, 0.5 * theta);
}

SpectralField grad_f_theta(const Basis& basis, const SpectralField& u, double theta) {
    const double r = norm(basis, u, 0.0);
    const double scale = theta / std::pow(r * r + 1.0, 1.0 - 0.5 * theta);
    SpectralField g(u.size());
    for (int i = 0; i < u.size(); ++i) g[i] = scale * u[i];
    return g;
}

double f_theta_hessian_trace(const Basis& basis, const SpectralField& u, double theta) {
    // Hess = theta X^{theta/2-1} I + theta(theta-2) X^{theta/2-2} u (x) u,
    // X = ||u||^2 + 1; the second term is nonpositive for theta <= 2
    const double r = norm(basis, u, 0.0);
    const double x = r * r + 1.0;
    const double n = static_cast<double>(u.size());
    return n * theta * std::pow(x, 0.5 * theta - 1.0) +
           theta * (theta - 2.0) * r * r * std::pow(x, 0.5 * theta - 2.0);
}

LipschitzCheck f_lipschitz_check(const Basis& basis, const SpectralField& u,
                                 const SpectralField& v, double theta) {
    if (u.size() != v.size()) throw std::invalid_argument("fields on different bases");
    SpectralField d(u.size());
    for (int i = 0; i < u.size(); ++i) d[i] = u[i] - v[i];
    const double fu = f_theta(basis, u, theta);
    const double fv = f_theta(basis, v, theta);
    const double rhs = std::pow(norm(basis, d, 0.0), theta);
    LipschitzCheck c;
    c.slack = rhs - std::abs(fu - fv);
    c.holds = c.slack >= -1e-12 * (1.0 + fu + fv);
    return c;
}

namespace {

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& intercept,
              double& slope) {
    const std::size_t n = x.size();
    if (n == 0) {
        intercept = slope = 0.0;
        return;
    }
    if (n == 1) {
        intercept = y[0];
        slope = 0.0;
        return;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    intercept = (sy - slope * sx) / dn;
}

double zof(double diff, double se) {
    if (diff == 0.0) return 0.0;
    return se > 0.0 ? std::abs(diff) / se : std::numeric_limits<double>::infinity();
}

}  // namespace

MomentReport moment_bound_report(const EnsembleResult& ens, double theta, double phi_l2) {
    MomentReport r;
    r.theta = theta;
    r.phi_l2 = phi_l2;
    r.horizons = ens.horizons;
    r.trajectories = static_cast<int>(ens.summaries.size());
    r.flagged = ens.flagged;
    r.reliable = ens.flagged <= 0.01 * r.trajectories;

    const std::size_t nh = ens.horizons.size();
    std::vector<Welford> ws(nh), wi(nh), wl(nh), wl_half(nh);
    const int half = r.trajectories / 2;
    int seen = 0;
    for (const auto& s : ens.summaries) {
        if (s.flagged) continue;
        for (std::size_t k = 0; k < nh; ++k) {
            ws[k].add(s.sup_at[k]);
            wi[k].add(s.integral_at[k]);
            wl[k].add(s.sup_at[k] + s.integral_at[k]);
            if (static_cast<int>(s.traj) < half) wl_half[k].add(s.sup_at[k] + s.integral_at[k]);
        }
        ++seen;
    }
    if (seen == 0) r.reliable = false;

    const double denom0 = 1.0 + std::pow(phi_l2, theta);
    for (std::size_t k = 0; k < nh; ++k) {
        r.sup_mean.push_back(ws[k].mean);
        r.sup_se.push_back(ws[k].se_mean());
        r.integral_mean.push_back(wi[k].mean);
        r.integral_se.push_back(wi[k].se_mean());
        r.lhs_mean.push_back(wl[k].mean);
        r.lhs_se.push_back(wl[k].se_mean());
        const double denom = denom0 + ens.horizons[k];
        r.c_hat_at.push_back(wl[k].mean / denom);
        r.c_hat_se.push_back(wl[k].se_mean() / denom);
        if (r.c_hat_at.back() > r.c_hat) {
            r.c_hat = r.c_hat_at.back();
            r.c_hat_argmax = static_cast<int>(k);
        }
    }
    fit_line(r.horizons, r.lhs_mean, r.fit_intercept, r.fit_slope);

    // Stability in T: consecutive envelope ratios for horizon doublings whose
    // base lies beyond t = 2 (falling back to all consecutive pairs when the
    // grid has none). The sup term grows like t^{1/alpha}, so the ratio carries
    // a deterministic t^{-(1-1/alpha)} transient that no sample size removes;
    // pairs starting at t <= 2 sit inside it and would fail at every M.
    std::vector<std::size_t> pairs;
    for (std::size_t k = 0; k + 1 < nh; ++k)
        if (ens.horizons[k] > 2.0 + 1e-12) pairs.push_back(k);
    if (pairs.empty())
        for (std::size_t k = 0; k + 1 < nh; ++k) pairs.push_back(k);
    r.stable_in_t = true;
    for (std::size_t k : pairs)
        if (std::abs(r.c_hat_at[k + 1] - r.c_hat_at[k]) >
            2.0 * (r.c_hat_se[k] + r.c_hat_se[k + 1]))
            r.stable_in_t = false;

    // stability in M: first half vs full at the envelope's argmax horizon
    if (half >= 1 && nh > 0) {
        const std::size_t k = static_cast<std::size_t>(r.c_hat_argmax);
        const double denom = denom0 + ens.horizons[k];
        r.c_hat_half = wl_half[k].mean / denom;
        const double se_half = wl_half[k].se_mean() / denom;
        r.stable_in_m = std::abs(r.c_hat_at[k] - r.c_hat_half) <= 2.0 * se_half;
    } else {
        r.stable_in_m = true;
    }
    return r;
}

GradientMomentReport gradient_moment_report(const EnsembleResult& ens, double theta,
                                            double phi_l2, double lambda1, double c_hat) {
    GradientMomentReport r;
    r.theta = theta;
    r.phi_l2 = phi_l2;
    r.horizons = ens.horizons;
    const std::size_t nh = ens.horizons.size();
    std::vector<Welford> w(nh);
    for (const auto& s : ens.summaries) {
        if (s.flagged) continue;
        for (std::size_t k = 0; k < nh; ++k) w[k].add(s.grad_theta_at[k]);
    }
    for (std::size_t k = 0; k < nh; ++k) {
        r.mean.push_back(w[k].mean);
        r.se.push_back(w[k].se_mean());
    }
    const double kappa = 0.5 * (2.0 - theta) * std::pow(lambda1, -0.5 * theta);
    r.c_prime = (c_hat + 1.0) / (1.0 - kappa);
    const double denom0 = 1.0 + std::pow(phi_l2, theta);
    r.within_envelope = true;
    for (std::size_t k = 0; k < nh; ++k)
        if (r.mean[k] > r.c_prime * (denom0 + ens.horizons[k]) + 2.0 * r.se[k])
            r.within_envelope = false;

    std::vector<double> xs, ys, ses;
    for (std::size_t k = 0; k < nh; ++k)
        if (ens.horizons[k] >= 2.0 - 1e-12) {
            xs.push_back(ens.horizons[k]);
            ys.push_back(r.mean[k]);
            ses.push_back(r.se[k]);
        }
    if (xs.size() < 2) {
        xs = ens.horizons;
        ys = r.mean;
        ses = r.se;
    }
    fit_line(xs, ys, r.fit_intercept, r.fit_slope);
    r.affine_in_t = true;
    for (std::size_t k = 0; k < xs.size(); ++k)
        if (std::abs(ys[k] - (r.fit_intercept + r.fit_slope * xs[k])) > 2.0 * ses[k] + 1e-15)
            r.affine_in_t = false;
    return r;
}

namespace {

// step indices of the requested times on the solver grid
std::vector<long long> aligned_steps(const std::vector<double>& times, double dt,
                                     double horizon) {
    std::vector<long long> steps;
    steps.reserve(times.size());
    for (double t : times) {
        if (t < 0.0 || t > horizon * (1.0 + 1e-12))
            throw std::invalid_argument("martingale sample time outside [0, T]");
        const double ratio = t / dt;
        const long long k = std::llround(ratio);
        if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument("martingale sample times must sit on the step grid");
        steps.push_back(k);
    }
    return steps;
}

// per-trajectory values of M at the requested step indices; the drift integral
// uses the trapezoid with the cadlag left limit (drifted state) at the right
// endpoint, so jumps land between quadrature intervals and never inside one
std::vector<std::vector<double>> collect_martingale(const SolverConfig& cfg, int j,
                                                    const std::vector<long long>& steps,
                                                    int m_trajectories, int workers,
                                                    std::vector<char>& valid) {
    const Basis basis = Basis::build(cfg.n);
    const double lam = basis.lambda(j - 1);
    const int jc = j - 1;
    std::vector<std::vector<double>> m_at(m_trajectories,
                                          std::vector<double>(steps.size(), 0.0));
    valid.assign(m_trajectories, 1);

#ifdef _OPENMP
    const int nthreads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    const int nthreads = 1;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (int i = 0; i < m_trajectories; ++i) {
        auto integrand = [&](const SpectralField& v) {
            return -lam * v[jc] + weak_nonlinear_pairing(basis, v, j);
        };
        double drift_integral = 0.0;
        double a0 = 0.0, g_left = 0.0;
        bool first = true;
        auto& out = m_at[i];
        try {
            simulate(cfg, static_cast<std::uint64_t>(i), [&](const StepView& v) {
                if (first) {
                    a0 = v.before[jc];
                    g_left = integrand(v.before);
                    first = false;
                }
                drift_integral +=
                    0.5 * (v.t1 - v.t0) * (g_left + integrand(v.drifted));
                g_left = integrand(v.after);
                for (std::size_t k = 0; k < steps.size(); ++k)
                    if (steps[k] == v.step) out[k] = v.after[jc] - a0 - drift_integral;
            });
        } catch (const BlowUpError&) {
            valid[i] = 0;
        }
    }
    return m_at;
}

}  // namespace

CharFunReport martingale_cf_test(const SolverConfig& cfg, int j,
                                 const std::vector<double>& xi_grid,
                                 const std::vector<std::pair<double, double>>& st_pairs,
                                 int m_trajectories, int workers) {
    if (j < 1 || j > cfg.n) throw std::invalid_argument("martingale mode outside the basis");
    if (m_trajectories < 2) throw std::invalid_argument("cf test needs an ensemble");

    std::vector<double> times;
    for (const auto& [s, t] : st_pairs) {
        if (!(t > s)) throw std::invalid_argument("cf pairs need t > s");
        times.push_back(s);
        times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const auto steps = aligned_steps(times, cfg.dt, cfg.horizon);
    auto slot = [&](double t) {
        return static_cast<std::size_t>(
            std::lower_bound(times.begin(), times.end(), t) - times.begin());
    };

    std::vector<char> valid;
    const auto m_at = collect_martingale(cfg, j, steps, m_trajectories, workers, valid);

    const double beta_j = cfg.noise_off ? 0.0 : cfg.noise.betas.beta(j);
    CharFunReport rep;
    rep.mode = j;
    int n_valid = 0;
    for (char v : valid) n_valid += v;
    rep.trajectories = n_valid;

    int within = 0;
    for (const auto& [s, t] : st_pairs) {
        const std::size_t ks = slot(s), kt = slot(t);
        std::vector<double> dm;
        dm.reserve(n_valid);
        for (int i = 0; i < m_trajectories; ++i)
            if (valid[i]) dm.push_back(m_at[i][kt] - m_at[i][ks]);
        for (double xi : xi_grid) {
            CfGridPoint p;
            p.xi = xi;
            p.s = s;
            p.t = t;
            const auto cf = empirical_cf(dm, xi);
            p.empirical = cf.value;
            p.se_re = cf.se_re;
            p.se_im = cf.se_im;
            const double psi =
                (xi == 0.0 || beta_j == 0.0)
                    ? 0.0
                    : levy_symbol(cfg.noise.measure, beta_j * xi).real();
            p.theory = std::exp((t - s) * psi);
            p.z = std::max(zof(p.empirical.real() - p.theory.real(), p.se_re),
                           zof(p.empirical.imag(), p.se_im));
            if (p.z < 3.0) ++within;
            rep.points.push_back(p);
        }
    }
    rep.pass_fraction =
        rep.points.empty() ? 1.0 : static_cast<double>(within) / rep.points.size();
    rep.pass = rep.pass_fraction >= 0.95;
    return rep;
}

IndependenceReport independence_test(const SolverConfig& cfg, int j, int k,
                                     const std::vector<std::pair<double, double>>& xi_eta_grid,
                                     std::pair<double, double> st, int m_trajectories,
                                     int workers) {
    if (j == k) throw std::invalid_argument("independence test needs distinct modes");
    const std::vector<double> times{st.first, st.second};
    if (!(st.second > st.first)) throw std::invalid_argument("independence pair needs t > s");
    const auto steps = aligned_steps(times, cfg.dt, cfg.horizon);

    std::vector<char> valid_j, valid_k;
    const auto mj = collect_martingale(cfg, j, steps, m_trajectories, workers, valid_j);
    const auto mk = collect_martingale(cfg, k, steps, m_trajectories, workers, valid_k);

    std::vector<double> dj, dk;
    for (int i = 0; i < m_trajectories; ++i) {
        if (!valid_j[i] || !valid_k[i]) continue;
        dj.push_back(mj[i][1] - mj[i][0]);
        dk.push_back(mk[i][1] - mk[i][0]);
    }
    IndependenceReport rep;
    rep.mode_j = j;
    rep.mode_k = k;
    rep.s = st.first;
    rep.t = st.second;
    rep.trajectories = static_cast<int>(dj.size());
    rep.pass = true;
    const double n = static_cast<double>(dj.size());
    for (const auto& [xi, eta] : xi_eta_grid) {
        IndependencePoint p;
        p.xi = xi;
        p.eta = eta;
        // joint CF and its se
        double scr = 0.0, ssr = 0.0, sc2 = 0.0, ss2 = 0.0;
        for (std::size_t i = 0; i < dj.size(); ++i) {
            const double arg = xi * dj[i] + eta * dk[i];
            const double c = std::cos(arg), s = std::sin(arg);
            scr += c;
            ssr += s;
            sc2 += c * c;
            ss2 += s * s;
        }
        const double jre = scr / n, jim = ssr / n;
        p.joint = {jre, jim};
        const double se_jre = std::sqrt(std::max(0.0, sc2 / n - jre * jre) / n);
        const double se_jim = std::sqrt(std::max(0.0, ss2 / n - jim * jim) / n);
        const auto cj = empirical_cf(dj, xi);
        const auto ck = empirical_cf(dk, eta);
        p.product = cj.value * ck.value;
        // delta-method se of the product plus the joint se, combined linearly
        // (conservative for correlated estimators from the same sample)
        const double se_prod = std::abs(cj.value) * std::hypot(ck.se_re, ck.se_im) +
                               std::abs(ck.value) * std::hypot(cj.se_re, cj.se_im);
        p.se = std::hypot(se_jre, se_jim) + se_prod;
        p.z = zof(std::abs(p.joint - p.product), p.se);
        if (p.z >= 3.0) rep.pass = false;
        rep.points.push_back(p);
    }
    return rep;
}

TailEnergyReport tail_energy(const Basis& basis, const TrajectoryRecord& rec, int m) {
    if (rec.snapshots.empty()) throw std::invalid_argument("trajectory has no snapshots");
    const int n = rec.snapshots.front().field.size();
    if (m < 1 || m > n) throw std::invalid_argument("tail index outside [1, n]");
    TailEnergyReport r;
    r.m = m;
    for (const auto& snap : rec.snapshots) {
        double tail = 0.0, energy = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a2 = snap.field[i] * snap.field[i];
            energy += a2;
            if (i >= m - 1) tail += a2 / (basis.lambda(i) * basis.lambda(i));
        }
        r.tail = std::max(r.tail, tail);
        r.bound = std::max(r.bound, energy);
    }
    const double lam_m = basis.lambda(m - 1);
    r.bound /= lam_m * lam_m;
    r.holds = r.tail <= r.bound * (1.0 + 1e-12);
    return r;
}

double skorohod_upper_bound(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    const auto& sa = a.snapshots;
    const auto& sb = b.snapshots;
    if (sa.size() != sb.size() || sa.empty())
        throw std::invalid_argument("trajectories need a common snapshot grid");
    const int n = std::max(sa.front().field.size(), sb.front().field.size());
    const Basis basis = Basis::build(n);

    double running = 0.0, total = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) {
        if (std::abs(sa[k].t - sb[k].t) > 1e-12 * (1.0 + std::abs(sa[k].t)))
            throw std::invalid_argument("trajectories need a common snapshot grid");
        double d2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double da = i < sa[k].field.size() ? sa[k].field[i] : 0.0;
            const double db = i < sb[k].field.size() ? sb[k].field[i] : 0.0;
            d2 += (da - db) * (da - db) / basis.lambda(i);
        }
        running = std::max(running, std::min(std::sqrt(d2), 1.0));
        if (k + 1 < sa.size())
            total += running * (std::exp(-sa[k].t) - std::exp(-sa[k + 1].t));
        else
            total += running * std::exp(-sa[k].t);
    }
    return total;
}

}  // namespace levyns
