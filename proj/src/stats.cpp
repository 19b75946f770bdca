#include "levyns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyns {

double Welford::se_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n1 = a.size(), n2 = b.size();
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("ks on empty sample");
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n1 && j < n2) {
        const double x = std::min(a[i], b[j]);
        while (i < n1 && a[i] <= x) ++i;
        while (j < n2 && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    return d;
}

namespace {

double kolmogorov_q(double lambda) {
    if (lambda < 0.1) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

double ks_asymptotic_pvalue(double d, std::size_t n1, std::size_t n2) {
    const double en = std::sqrt(static_cast<double>(n1) * static_cast<double>(n2) /
                                static_cast<double>(n1 + n2));
    return kolmogorov_q(en * d);
}

double ks_critical_value(double level, std::size_t n1, std::size_t n2) {
    // invert Q by bisection; Q is monotone decreasing
    double lo = 0.1, hi = 4.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_q(mid) > level)
            lo = mid;
        else
            hi = mid;
    }
    const double en = std::sqrt(static_cast<double>(n1) * static_cast<double>(n2) /
                                static_cast<double>(n1 + n2));
    return 0.5 * (lo + hi) / en;
}

namespace {

// D over pooled sorted values given per-value group labels (true = sample a)
double ks_from_labels(const std::vector<std::pair<double, bool>>& pooled, std::size_t n1,
                      std::size_t n2) {
    std::size_t ca = 0, cb = 0;
    double d = 0.0;
    const std::size_t total = pooled.size();
    std::size_t i = 0;
    while (i < total) {
        const double x = pooled[i].first;
        while (i < total && pooled[i].first == x) {
            if (pooled[i].second)
                ++ca;
            else
                ++cb;
            ++i;
        }
        d = std::max(d, std::abs(static_cast<double>(ca) / static_cast<double>(n1) -
                                 static_cast<double>(cb) / static_cast<double>(n2)));
    }
    return d;
}

}  // namespace

KsResult two_sample_ks(std::vector<double> a, std::vector<double> b, int permutations,
                       CounterRng* rng) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    KsResult r;
    r.d = ks_statistic(a, b);
    r.p_asymptotic = ks_asymptotic_pvalue(r.d, a.size(), b.size());
    r.pass_1pct = r.p_asymptotic >= 0.01;

    if (permutations > 0) {
        if (rng == nullptr) throw std::invalid_argument("permutation test needs an rng");
        std::vector<std::pair<double, bool>> pooled;
        pooled.reserve(a.size() + b.size());
        for (double x : a) pooled.emplace_back(x, true);
        for (double x : b) pooled.emplace_back(x, false);
        std::sort(pooled.begin(), pooled.end(),
                  [](const auto& p, const auto& q) { return p.first < q.first; });

        std::vector<bool> labels(pooled.size());
        for (std::size_t i = 0; i < pooled.size(); ++i) labels[i] = pooled[i].second;

        int exceed = 0;
        for (int round = 0; round < permutations; ++round) {
            // Fisher-Yates on the label array; the value order stays sorted
            for (std::size_t i = labels.size() - 1; i > 0; --i) {
                const std::size_t j = rng->next_u64() % (i + 1);
                std::swap(labels[i], labels[j]);
            }
            for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i].second = labels[i];
            if (ks_from_labels(pooled, a.size(), b.size()) >= r.d) ++exceed;
        }
        r.p_permutation = (1.0 + exceed) / (1.0 + permutations);
        r.pass_1pct = r.p_permutation >= 0.01;
    }
    return r;
}

KsResult block_permutation_ks(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& blocks,
    int permutations, CounterRng& rng) {
    std::vector<double> a, b;
    for (const auto& [ba, bb] : blocks) {
        a.insert(a.end(), ba.begin(), ba.end());
        b.insert(b.end(), bb.begin(), bb.end());
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    KsResult r;
    r.d = ks_statistic(a, b);
    r.p_asymptotic = ks_asymptotic_pvalue(r.d, a.size(), b.size());

    int exceed = 0;
    for (int round = 0; round < permutations; ++round) {
        std::vector<double> pa, pb;
        pa.reserve(a.size());
        pb.reserve(b.size());
        for (const auto& [ba, bb] : blocks) {
            const bool swap_blocks = rng.next_u64() & 1ull;
            const auto& first = swap_blocks ? bb : ba;
            const auto& second = swap_blocks ? ba : bb;
            pa.insert(pa.end(), first.begin(), first.end());
            pb.insert(pb.end(), second.begin(), second.end());
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        if (ks_statistic(pa, pb) >= r.d) ++exceed;
    }
    r.p_permutation = (1.0 + exceed) / (1.0 + permutations);
    r.pass_1pct = r.p_permutation >= 0.01;
    return r;
}

EmpiricalCf empirical_cf(const std::vector<double>& xs, double xi) {
    if (xs.empty()) throw std::invalid_argument("empirical cf of empty sample");
    double sc = 0.0, ss = 0.0, sc2 = 0.0, ss2 = 0.0;
    for (double x : xs) {
        const double c = std::cos(xi * x);
        const double s = std::sin(xi * x);
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    const double n = static_cast<double>(xs.size());
    EmpiricalCf out;
    const double mre = sc / n, mim = ss / n;
    out.value = {mre, mim};
    out.se_re = std::sqrt(std::max(0.0, sc2 / n - mre * mre) / n);
    out.se_im = std::sqrt(std::max(0.0, ss2 / n - mim * mim) / n);
    return out;
}

double hill_plain(const std::vector<double>& sorted_desc, int k) {
    if (k < 1 || k + 1 > static_cast<int>(sorted_desc.size()))
        throw std::invalid_argument("hill: order out of range");
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::log(sorted_desc[i]);
    const double h = s / k - std::log(sorted_desc[k]);
    return 1.0 / h;
}

namespace {

// value of shifted Legendre P_m(2u-1)
double legendre_shifted(int m, double u) {
    const double x = 2.0 * u - 1.0;
    switch (m) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return 0.5 * (3.0 * x * x - 1.0);
        case 3: return 0.5 * x * (5.0 * x * x - 3.0);
        default: throw std::invalid_argument("regression degree limited to 3");
    }
}

}  // namespace

double hill_spacing_regression(const std::vector<double>& sorted_desc, int top_k, int degree) {
    const int n = static_cast<int>(sorted_desc.size());
    const int K = std::min(top_k, n - 1);
    if (K < 10 * (degree + 1)) throw std::invalid_argument("tail regression underpowered");

    const int p = degree + 1;
    long double ata[4][4] = {};
    long double aty[4] = {};
    double prev_log = std::log(sorted_desc[0]);
    for (int i = 1; i <= K; ++i) {
        const double cur_log = std::log(sorted_desc[i]);
        const double e = static_cast<double>(i) * (prev_log - cur_log);  // Renyi spacing
        prev_log = cur_log;
        const double u = static_cast<double>(i) / static_cast<double>(K);
        double phi[4];
        for (int m = 0; m < p; ++m) phi[m] = legendre_shifted(m, u);
        for (int r = 0; r < p; ++r) {
            aty[r] += phi[r] * e;
            for (int c = 0; c < p; ++c) ata[r][c] += phi[r] * phi[c];
        }
    }
    // solve the p x p normal equations by Gaussian elimination with pivoting
    for (int col = 0; col < p; ++col) {
        int piv = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(static_cast<double>(ata[r][col])) >
                std::abs(static_cast<double>(ata[piv][col])))
                piv = r;
        if (piv != col) {
            for (int c = 0; c < p; ++c) std::swap(ata[col][c], ata[piv][c]);
            std::swap(aty[col], aty[piv]);
        }
        for (int r = col + 1; r < p; ++r) {
            const long double f = ata[r][col] / ata[col][col];
            for (int c = col; c < p; ++c) ata[r][c] -= f * ata[col][c];
            aty[r] -= f * aty[col];
        }
    }
    long double coef[4] = {};
    for (int r = p - 1; r >= 0; --r) {
        long double s = aty[r];
        for (int c = r + 1; c < p; ++c) s -= ata[r][c] * coef[c];
        coef[r] = s / ata[r][r];
    }
    // intercept = fitted value at u = 0, i.e. sum coef_m P_m(-1) = sum (-1)^m coef_m
    long double intercept = 0.0;
    for (int m = 0; m < p; ++m) intercept += ((m % 2 == 0) ? 1.0 : -1.0) * coef[m];
    return 1.0 / static_cast<double>(intercept);
}

double hill_auto(const std::vector<double>& sorted_desc) {
    const int n = static_cast<int>(sorted_desc.size());
    const int k1 = std::min(10000, n / 10);
    const double pilot = hill_spacing_regression(sorted_desc, k1, 1);
    if (pilot < 1.7) return hill_spacing_regression(sorted_desc, std::min(40000, n / 10), 2);
    // near alpha = 2 the clean tail is thin: blend the short linear fit with a
    // longer cubic fit to balance variance against residual curvature
    const double a = hill_spacing_regression(sorted_desc, k1, 1);
    const double b = hill_spacing_regression(sorted_desc, std::min(40000, n / 10), 3);
    return 0.5 * (a + b);
}

double Histogram::total_mass() const {
    double s = underflow + overflow;
    for (double m : mass) s += m;
    return s;
}

Histogram make_histogram(const std::vector<double>& xs, double lo, double hi, int bins) {
    if (!(hi > lo) || bins < 1) throw std::invalid_argument("bad histogram range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.bins = bins;
    h.mass.assign(bins, 0.0);
    if (xs.empty()) return h;
    const double w = static_cast<double>(bins) / (hi - lo);
    for (double x : xs) {
        if (x < lo) {
            h.underflow += 1.0;
        } else if (x >= hi) {
            h.overflow += 1.0;
        } else {
            const int b = std::min(bins - 1, static_cast<int>((x - lo) * w));
            h.mass[b] += 1.0;
        }
    }
    const double total = static_cast<double>(xs.size());
    for (double& m : h.mass) m /= total;
    h.underflow /= total;
    h.overflow /= total;
    return h;
}

}  // namespace levyns
