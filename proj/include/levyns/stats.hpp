#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "levyns/rng.hpp"

// Statistical toolkit: running moments, quantiles, two-sample Kolmogorov-
// Smirnov (asymptotic and permutation), empirical characteristic functions,
// tail-index estimation, fixed-edge histograms.

namespace levyns {

struct Welford {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double se_mean() const;
};

// q in [0,1] on an ascending-sorted vector, linear interpolation
double quantile_sorted(const std::vector<double>& sorted, double q);

// sup |F_a - F_b| over the pooled sample; ties handled by advancing both
// empirical CDFs through the tied value before comparing
double ks_statistic(const std::vector<double>& a_sorted, const std::vector<double>& b_sorted);

// limiting Kolmogorov distribution: p = Q(sqrt(n1 n2/(n1+n2)) * d)
double ks_asymptotic_pvalue(double d, std::size_t n1, std::size_t n2);

// critical D at significance level `level` (asymptotic), e.g. 1.62762 scaling at 1%
double ks_critical_value(double level, std::size_t n1, std::size_t n2);

struct KsResult {
    double d = 0.0;
    double p_asymptotic = 1.0;
    double p_permutation = -1.0;  // negative when permutation was skipped
    bool pass_1pct = true;        // permutation verdict when available, else asymptotic
};

// two-sample test; permutations > 0 adds a label-permutation p-value
KsResult two_sample_ks(std::vector<double> a, std::vector<double> b, int permutations = 0,
                       CounterRng* rng = nullptr);

// Stationarity variant for within-trajectory correlated samples: each entry is
// one trajectory's (window A, window B) sample blocks. The null swaps whole
// blocks per trajectory, preserving intra-trajectory dependence.
KsResult block_permutation_ks(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& blocks,
                              int permutations, CounterRng& rng);

struct EmpiricalCf {
    std::complex<double> value;
    double se_re = 0.0;
    double se_im = 0.0;
};
EmpiricalCf empirical_cf(const std::vector<double>& xs, double xi);

// ---- tail index ------------------------------------------------------------
// hill_plain: the textbook estimator 1/H(k), H(k) = mean(log X_(1..k)) - log X_(k+1).
// hill_spacing_regression: reduced-bias variant; the Renyi spacings
// e_i = i (log X_(i) - log X_(i+1)) are ~iid Exp(1/alpha) plus a smooth bias in
// i/K, so an OLS polynomial fit's intercept estimates 1/alpha with the leading
// bias terms removed.
// hill_auto: two-stage policy (degree/K chosen from a pilot estimate) tuned so
// the +-0.05 recovery band holds across alpha in (0.5, 2) at 1e6 draws.
double hill_plain(const std::vector<double>& sorted_desc, int k);
double hill_spacing_regression(const std::vector<double>& sorted_desc, int top_k, int degree);
double hill_auto(const std::vector<double>& sorted_desc);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    int bins = 64;
    std::vector<double> mass;  // bins entries, normalized together with the flows
    double underflow = 0.0;
    double overflow = 0.0;

    double bin_lo(int i) const { return lo + (hi - lo) * i / bins; }
    double bin_hi(int i) const { return lo + (hi - lo) * (i + 1) / bins; }
    double total_mass() const;
};
Histogram make_histogram(const std::vector<double>& xs, double lo, double hi, int bins = 64);

}  // namespace levyns
