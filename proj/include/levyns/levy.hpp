#pragma once

#include <complex>
#include <string>
#include <vector>

#include "levyns/rng.hpp"

// One-dimensional symmetric alpha-stable jump measures nu(dx) = c|x|^{-1-alpha}dx
// (optionally truncated to |x| <= R), the cylindrical increment
// dL = sum_j beta_j dL^(j) e_j, the summability functional H_theta, and the
// Levy symbol psi(xi) = integral (e^{i xi y} - 1 - i xi y 1_{|y|<=1}) nu(dy).

namespace levyns {

enum class LevyFamily { symmetric_stable, truncated_stable };

struct LevyMeasureSpec {
    LevyFamily family = LevyFamily::symmetric_stable;
    double alpha = 1.5;      // in (0,2)
    double intensity = 1.0;  // c > 0
    double r_trunc = 0.0;    // truncation radius, truncated family only

    bool truncated() const { return family == LevyFamily::truncated_stable; }
};

std::vector<std::string> validate_measure(const LevyMeasureSpec& m);

struct CoefficientSequence {
    enum class Rule { power, list };
    Rule rule = Rule::power;
    double exponent = 2.0;       // beta_j = j^{-exponent} under the power rule
    std::vector<double> values;  // explicit list

    static CoefficientSequence power_rule(double r) {
        CoefficientSequence s;
        s.rule = Rule::power;
        s.exponent = r;
        return s;
    }
    static CoefficientSequence explicit_list(std::vector<double> v) {
        CoefficientSequence s;
        s.rule = Rule::list;
        s.values = std::move(v);
        return s;
    }

    double beta(int j) const;  // 1-based
    int max_modes() const;     // -1 when the rule extends to every j
};

struct LevyNoiseSpec {
    LevyMeasureSpec measure;
    CoefficientSequence betas;
    double theta = 1.0;  // in (0,1]
};

// H_theta = integral_{|x|>1} |x|^theta nu(dx) + sum_j beta_j^theta.
// n < 0 evaluates the coefficient series in full (power rule: Riemann zeta).
struct HThetaResult {
    bool finite = false;
    double value = 0.0;
    double big_jump_term = 0.0;
    double series_term = 0.0;
    std::string reason;  // set when divergent
};
HThetaResult h_theta(const LevyNoiseSpec& spec, int n = -1);

// Levy symbol by adaptive quadrature; real for the symmetric family.
// Throws when the quadrature cannot reach tolerance (message carries the
// achieved estimate).
std::complex<double> levy_symbol(const LevyMeasureSpec& m, double xi);

// -psi(1) for the untruncated family in closed form:
// sigma^alpha = 2 c Gamma(2-alpha) cos(pi alpha/2) / (alpha (1-alpha)), -> pi c at alpha=1.
// The increment CF is then exp(-dt sigma^alpha |xi|^alpha).
double stable_sigma_alpha(double alpha, double intensity);

// one draw of a symmetric alpha-stable variable, CF exp(-scale^alpha |xi|^alpha)
// (Chambers-Mallows-Stuck)
double sample_stable(double alpha, double scale, CounterRng& rng);

struct BigJump {
    int mode = 0;    // 1-based j
    double y = 0.0;  // raw (unscaled) jump of L^(j), |y| > 1
};

struct NoiseIncrement {
    std::vector<double> dl;  // per-mode increments of beta_j L^(j), j = 1..n
    double dt = 0.0;
    std::vector<BigJump> big_jumps;  // populated by the levy-ito backend
};

enum class NoiseBackend { exact, levy_ito };

struct NoiseSettings {
    NoiseBackend backend = NoiseBackend::exact;
    double small_jump_cutoff = 1e-3;  // levy-ito: jumps below this are dropped
                                      // (their compensator vanishes by symmetry)
};

class IncrementGenerator {
  public:
    IncrementGenerator(LevyNoiseSpec spec, int n, NoiseSettings settings,
                       std::uint64_t master_seed);

    NoiseIncrement generate(std::uint64_t traj, std::uint64_t step, double dt) const;

    // rms of the dropped small-jump mass per unit beta:
    // (dt integral_{|y|<=delta} y^2 nu(dy))^{1/2}; zero for the exact backend
    double small_jump_bias_bound(double dt) const;

    int modes() const { return n_; }
    const LevyNoiseSpec& spec() const { return spec_; }
    const NoiseSettings& settings() const { return settings_; }

  private:
    LevyNoiseSpec spec_;
    int n_ = 0;
    NoiseSettings settings_;
    std::uint64_t master_ = 0;
    std::vector<double> beta_;  // cached beta_1..beta_n
    double sigma0_ = 0.0;       // exact backend: (2 c C(alpha))^{1/alpha}
    double jump_rate_ = 0.0;    // levy-ito: nu({|y| > delta}) (finite)
    double inv_lo_ = 0.0;       // delta^{-alpha}
    double inv_hi_ = 0.0;       // R^{-alpha} (0 when untruncated)
};

// convenience wrapper matching the one-shot operation shape
NoiseIncrement increment(const LevyNoiseSpec& spec, int n, double dt, NoiseSettings settings,
                         std::uint64_t master_seed, std::uint64_t traj = 0,
                         std::uint64_t step = 0);

// Empirical CF of the first-mode increment against exp(dt psi(beta_1 xi)).
struct CfPoint {
    double xi = 0.0;
    std::complex<double> empirical;
    double se_re = 0.0, se_im = 0.0;
    std::complex<double> theory;
    double z = 0.0;  // max of the real/imaginary z-scores
};
struct CfReport {
    std::vector<CfPoint> points;
    bool pass = true;  // all z < 3
};
CfReport increment_cf_check(const LevyNoiseSpec& spec, NoiseSettings settings, double dt,
                            const std::vector<double>& xi_grid, int n_draws,
                            std::uint64_t master_seed);

}  // namespace levyns
