#include "levyns/levy.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace levyns {

namespace {

double poisson_knuth(double lambda, CounterRng& rng) {
    // chunked so the e^{-lambda} threshold never underflows
    double remaining = lambda;
    long long count = 0;
    while (remaining > 0.0) {
        const double lam = std::min(remaining, 500.0);
        remaining -= lam;
        const double threshold = std::exp(-lam);
        double p = 1.0;
        long long k = 0;
        do {
            ++k;
            p *= rng.uniform01();
        } while (p > threshold);
        count += k - 1;
    }
    return static_cast<double>(count);
}

}  // namespace

std::vector<std::string> validate_measure(const LevyMeasureSpec& m) {
    std::vector<std::string> errors;
    if (!(m.alpha > 0.0 && m.alpha < 2.0)) errors.push_back("alpha must lie in (0,2)");
    if (!(m.intensity > 0.0)) errors.push_back("intensity must be positive");
    if (m.truncated() && !(m.r_trunc > 0.0))
        errors.push_back("truncated family needs a positive truncation radius");
    return errors;
}

double CoefficientSequence::beta(int j) const {
    if (j < 1) throw std::invalid_argument("coefficient index is 1-based");
    if (rule == Rule::power) return std::pow(static_cast<double>(j), -exponent);
    if (j > static_cast<int>(values.size()))
        throw std::out_of_range("coefficient list shorter than requested index");
    return values[j - 1];
}

int CoefficientSequence::max_modes() const {
    return rule == Rule::power ? -1 : static_cast<int>(values.size());
}

HThetaResult h_theta(const LevyNoiseSpec& spec, int n) {
    const double alpha = spec.measure.alpha;
    const double c = spec.measure.intensity;
    const double theta = spec.theta;
    HThetaResult r;

    // big-jump term: integral_{|x|>1} |x|^theta nu(dx) = 2c int_1^U x^{theta-1-alpha} dx
    if (!spec.measure.truncated()) {
        if (theta >= alpha) {
            r.reason = "big-jump integral diverges (theta >= alpha, untruncated measure)";
            return r;
        }
        r.big_jump_term = 2.0 * c / (alpha - theta);
    } else {
        const double R = spec.measure.r_trunc;
        if (R <= 1.0) {
            r.big_jump_term = 0.0;
        } else if (std::abs(theta - alpha) < 1e-12) {
            r.big_jump_term = 2.0 * c * std::log(R);
        } else {
            r.big_jump_term = 2.0 * c * (1.0 - std::pow(R, theta - alpha)) / (alpha - theta);
        }
    }

    // coefficient series sum_j beta_j^theta
    const auto& b = spec.betas;
    if (n >= 0) {
        const int limit = (b.max_modes() >= 0) ? std::min(n, b.max_modes()) : n;
        double s = 0.0;
        for (int j = 1; j <= limit; ++j) s += std::pow(std::abs(b.beta(j)), theta);
        r.series_term = s;
    } else if (b.rule == CoefficientSequence::Rule::list) {
        double s = 0.0;
        for (double v : b.values) s += std::pow(std::abs(v), theta);
        r.series_term = s;
    } else {
        const double p = b.exponent * theta;
        if (p <= 1.0) {
            r.reason = "coefficient series diverges (exponent * theta <= 1)";
            return r;
        }
        r.series_term = std::riemann_zeta(p);
    }

    r.finite = true;
    r.value = r.big_jump_term + r.series_term;
    return r;
}

std::complex<double> levy_symbol(const LevyMeasureSpec& m, double xi) {
    if (xi == 0.0) return {0.0, 0.0};
    const double s = std::abs(xi);  // symbol is even; imaginary part vanishes by symmetry
    const double alpha = m.alpha;
    const double c = m.intensity;
    const double upper = m.truncated() ? m.r_trunc : std::numeric_limits<double>::infinity();
    const double period = 2.0 * M_PI / s;

    double total = 0.0;
    double err_budget = 0.0;

    // head chunk [0, min(period, upper)]: the raw integrand is singular at 0
    // (and 0 * inf-prone in doubles), but u = y^{2-alpha} turns it into the
    // bounded smooth -(p s^2/2) sinc^2(s u^p / 2), p = 1/(2-alpha)
    const double head_end = std::min(period, upper);
    {
        const double p = 1.0 / (2.0 - alpha);
        auto head = [&](double u) {
            const double x = 0.5 * s * std::pow(u, p);
            const double sinc = x < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
            return -0.5 * p * s * s * sinc * sinc;
        };
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            head, 0.0, std::pow(head_end, 2.0 - alpha), 8, 1e-12, &err);
        err_budget += err;
    }

    if (upper > head_end) {
        // split: (cos - 1) = cos part (oscillatory, summed per period) minus the
        // plain power tail, which integrates in closed form
        const double tail_mass = std::isinf(upper)
                                     ? std::pow(head_end, -alpha) / alpha
                                     : (std::pow(head_end, -alpha) - std::pow(upper, -alpha)) / alpha;
        total -= tail_mass;

        auto cos_part = [&](double y) { return std::cos(s * y) * std::pow(y, -1.0 - alpha); };
        const long long max_chunks = 200000;
        double last = 0.0;
        long long k = 1;
        for (; k <= max_chunks; ++k) {
            const double a = head_end + (k - 1) * period;
            const double b = std::min(head_end + k * period, upper);
            double err = 0.0;
            last = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                cos_part, a, b, 3, 1e-12, &err);
            total += last;
            err_budget += err;
            if (b >= upper) break;
            if (std::abs(last) < 1e-16 * (1.0 + std::abs(total)) && k > 2) break;
        }
        if (std::isinf(upper)) err_budget += std::abs(last) * 2.0;
        if (k > max_chunks)
            throw std::runtime_error("levy_symbol quadrature did not converge (achieved ~" +
                                     std::to_string(err_budget) + ")");
    }

    const double value = 2.0 * c * total;
    if (err_budget > 1e-8 * (1.0 + std::abs(value)))
        throw std::runtime_error("levy_symbol quadrature tolerance not met (achieved ~" +
                                 std::to_string(err_budget) + ")");
    return {value, 0.0};
}

double stable_sigma_alpha(double alpha, double intensity) {
    if (std::abs(alpha - 1.0) < 1e-10) return M_PI * intensity;
    const double C =
        std::tgamma(2.0 - alpha) * std::cos(M_PI * alpha / 2.0) / (alpha * (1.0 - alpha));
    return 2.0 * intensity * C;
}

double sample_stable(double alpha, double scale, CounterRng& rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double v = M_PI * (u1 - 0.5);
    if (std::abs(alpha - 1.0) < 1e-10) return scale * std::tan(v);
    const double w = -std::log(u2);
    const double t1 = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    const double t2 = std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    return scale * t1 * t2;
}

IncrementGenerator::IncrementGenerator(LevyNoiseSpec spec, int n, NoiseSettings settings,
                                       std::uint64_t master_seed)
    : spec_(std::move(spec)), n_(n), settings_(settings), master_(master_seed) {
    auto errors = validate_measure(spec_.measure);
    if (!(spec_.theta > 0.0 && spec_.theta <= 1.0))
        errors.push_back("theta must lie in (0,1]");
    if (n_ < 1) errors.push_back("mode count must be >= 1");
    if (spec_.betas.max_modes() >= 0 && n_ > spec_.betas.max_modes())
        errors.push_back("coefficient list shorter than the mode count");
    if (settings_.backend == NoiseBackend::exact && spec_.measure.truncated())
        errors.push_back("exact backend requires the untruncated stable family "
                         "(truncated increments are not stable)");
    if (settings_.backend == NoiseBackend::levy_ito) {
        if (!(settings_.small_jump_cutoff > 0.0) || settings_.small_jump_cutoff > 1.0)
            errors.push_back("small-jump cutoff must lie in (0,1]");
        if (spec_.measure.truncated() && settings_.small_jump_cutoff >= spec_.measure.r_trunc)
            errors.push_back("small-jump cutoff must stay below the truncation radius");
    }
    if (!errors.empty()) {
        std::string msg = "invalid noise spec:";
        for (const auto& e : errors) msg += " " + e + ";";
        throw std::invalid_argument(msg);
    }

    beta_.resize(n_);
    for (int j = 1; j <= n_; ++j) beta_[j - 1] = spec_.betas.beta(j);

    const double alpha = spec_.measure.alpha;
    const double c = spec_.measure.intensity;
    if (settings_.backend == NoiseBackend::exact) {
        sigma0_ = std::pow(stable_sigma_alpha(alpha, c), 1.0 / alpha);
    } else {
        inv_lo_ = std::pow(settings_.small_jump_cutoff, -alpha);
        inv_hi_ = spec_.measure.truncated() ? std::pow(spec_.measure.r_trunc, -alpha) : 0.0;
        jump_rate_ = 2.0 * c * (inv_lo_ - inv_hi_) / alpha;
    }
}

NoiseIncrement IncrementGenerator::generate(std::uint64_t traj, std::uint64_t step,
                                            double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    NoiseIncrement inc;
    inc.dt = dt;
    inc.dl.resize(n_);

    const double alpha = spec_.measure.alpha;
    for (int j = 1; j <= n_; ++j) {
        CounterRng rng = make_rng(master_, StreamPurpose::noise, traj,
                                  static_cast<std::uint64_t>(j), step);
        if (settings_.backend == NoiseBackend::exact) {
            inc.dl[j - 1] =
                beta_[j - 1] * sample_stable(alpha, sigma0_ * std::pow(dt, 1.0 / alpha), rng);
        } else {
            const double lam = dt * jump_rate_;
            if (lam > 1e6)
                throw std::invalid_argument(
                    "levy-ito jump rate too high; raise the small-jump cutoff or shrink dt");
            const double count = poisson_knuth(lam, rng);
            double sum = 0.0;
            for (long long i = 0; i < static_cast<long long>(count); ++i) {
                const double u = rng.uniform01();
                const double y = std::pow(inv_lo_ - u * (inv_lo_ - inv_hi_), -1.0 / alpha);
                const double sign = (rng.next_u64() & 1ull) ? 1.0 : -1.0;
                sum += sign * y;
                if (y > 1.0) inc.big_jumps.push_back(BigJump{j, sign * y});
            }
            inc.dl[j - 1] = beta_[j - 1] * sum;
        }
    }
    return inc;
}

double IncrementGenerator::small_jump_bias_bound(double dt) const {
    if (settings_.backend == NoiseBackend::exact) return 0.0;
    const double alpha = spec_.measure.alpha;
    const double c = spec_.measure.intensity;
    const double delta = settings_.small_jump_cutoff;
    return std::sqrt(dt * 2.0 * c * std::pow(delta, 2.0 - alpha) / (2.0 - alpha));
}

NoiseIncrement increment(const LevyNoiseSpec& spec, int n, double dt, NoiseSettings settings,
                         std::uint64_t master_seed, std::uint64_t traj, std::uint64_t step) {
    return IncrementGenerator(spec, n, settings, master_seed).generate(traj, step, dt);
}

CfReport increment_cf_check(const LevyNoiseSpec& spec, NoiseSettings settings, double dt,
                            const std::vector<double>& xi_grid, int n_draws,
                            std::uint64_t master_seed) {
    if (n_draws < 10000) throw std::invalid_argument("cf check needs at least 1e4 draws");
    IncrementGenerator gen(spec, 1, settings, master_seed);
    std::vector<double> draws(n_draws);
    for (int i = 0; i < n_draws; ++i)
        draws[i] = gen.generate(static_cast<std::uint64_t>(i), 0, dt).dl[0];

    const double beta1 = spec.betas.beta(1);
    CfReport report;
    for (double xi : xi_grid) {
        CfPoint p;
        p.xi = xi;
        double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
        for (double x : draws) {
            const double cc = std::cos(xi * x);
            const double sk = std::sin(xi * x);
            sc += cc;
            ss += sk;
            sc2 += cc * cc;
            ss2 += sk * sk;
        }
        const double n = static_cast<double>(n_draws);
        const double mre = sc / n, mim = ss / n;
        p.empirical = {mre, mim};
        p.se_re = std::sqrt(std::max(0.0, sc2 / n - mre * mre) / n);
        p.se_im = std::sqrt(std::max(0.0, ss2 / n - mim * mim) / n);
        p.theory = std::exp(dt * levy_symbol(spec.measure, beta1 * xi));
        const double dre = std::abs(mre - p.theory.real());
        const double dim = std::abs(mim - p.theory.imag());
        auto zof = [](double d, double se) {
            if (d == 0.0) return 0.0;
            return d / std::max(se, 1e-300);
        };
        p.z = std::max(zof(dre, p.se_re), zof(dim, p.se_im));
        if (p.z >= 3.0) report.pass = false;
        report.points.push_back(p);
    }
    return report;
}

}  // namespace levyns
