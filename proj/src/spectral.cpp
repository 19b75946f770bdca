#include "levyns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyns {

Basis Basis::build(int n) {
    if (n < 1) throw std::invalid_argument("basis size must be >= 1");

    // Enumerate canonical half-lattice waves out to a box large enough to hold
    // ceil(n/2) of them, then order by (|k|^2, kx, ky).
    const int need_waves = (n + 1) / 2;
    std::vector<WaveVector> waves;
    for (int box = 1;; ++box) {
        waves.clear();
        for (int ky = 0; ky <= box; ++ky) {
            for (int kx = -box; kx <= box; ++kx) {
                WaveVector w{kx, ky};
                if (!w.canonical()) continue;
                waves.push_back(w);
            }
        }
        // Only waves with |k|^2 <= box^2 are guaranteed complete shells within the box.
        std::erase_if(waves, [&](const WaveVector& w) {
            return w.norm2() > static_cast<long long>(box) * box;
        });
        if (static_cast<int>(waves.size()) >= need_waves) break;
    }
    std::sort(waves.begin(), waves.end(), [](const WaveVector& a, const WaveVector& b) {
        if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
        if (a.kx != b.kx) return a.kx < b.kx;
        return a.ky < b.ky;
    });

    Basis basis;
    basis.modes_.reserve(n);
    for (const WaveVector& w : waves) {
        const double klen = std::sqrt(static_cast<double>(w.norm2()));
        const double lambda = 4.0 * M_PI * M_PI * static_cast<double>(w.norm2());
        const std::array<double, 2> dir{-w.ky / klen, w.kx / klen};
        for (Phase ph : {Phase::cosine, Phase::sine}) {
            if (static_cast<int>(basis.modes_.size()) == n) break;
            BasisMode m;
            m.index = static_cast<int>(basis.modes_.size()) + 1;
            m.wave = w;
            m.phase = ph;
            m.lambda = lambda;
            m.direction = dir;
            basis.modes_.push_back(m);
        }
        if (static_cast<int>(basis.modes_.size()) == n) break;
    }
    return basis;
}

int Basis::max_wave_component(int m) const {
    const int count = (m < 0) ? size() : std::min(m, size());
    int kmax = 0;
    for (int i = 0; i < count; ++i) {
        kmax = std::max(kmax, std::max(std::abs(modes_[i].wave.kx), std::abs(modes_[i].wave.ky)));
    }
    return kmax;
}

double norm(const Basis& basis, const SpectralField& u, double gamma) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double w = (gamma == 0.0) ? 1.0 : std::pow(basis.lambda(i), gamma);
        s += w * u[i] * u[i];
    }
    return std::sqrt(s);
}

double inner(const SpectralField& u, const SpectralField& v) {
    double s = 0.0;
    const int n = std::min(u.size(), v.size());
    for (int i = 0; i < n; ++i) s += u[i] * v[i];
    return s;
}

SpectralField project(const SpectralField& u, int m) {
    SpectralField out = u;
    for (int i = m; i < out.size(); ++i) out[i] = 0.0;
    return out;
}

std::array<double, 2> evaluate_at(const Basis& basis, const SpectralField& u, double x, double y) {
    std::array<double, 2> v{0.0, 0.0};
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        const BasisMode& m = basis.mode(i);
        const double arg = 2.0 * M_PI * (m.wave.kx * x + m.wave.ky * y);
        const double trig = (m.phase == Phase::cosine) ? std::cos(arg) : std::sin(arg);
        const double amp = sqrt2 * u[i] * trig;
        v[0] += amp * m.direction[0];
        v[1] += amp * m.direction[1];
    }
    return v;
}

std::vector<std::array<double, 2>> evaluate(const Basis& basis, const SpectralField& u, int res) {
    const int kmax = basis.max_wave_component(u.size());
    if (res < 2 * kmax + 1)
        throw std::invalid_argument("grid resolution " + std::to_string(res) +
                                    " aliases modes up to wavenumber " + std::to_string(kmax));
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(res) * res, {0.0, 0.0});
    // precompute cos/sin tables per wavenumber value
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        const BasisMode& m = basis.mode(i);
        for (int iy = 0; iy < res; ++iy) {
            const double y = static_cast<double>(iy) / res;
            for (int ix = 0; ix < res; ++ix) {
                const double x = static_cast<double>(ix) / res;
                const double arg = 2.0 * M_PI * (m.wave.kx * x + m.wave.ky * y);
                const double trig = (m.phase == Phase::cosine) ? std::cos(arg) : std::sin(arg);
                const double amp = sqrt2 * u[i] * trig;
                auto& v = out[static_cast<std::size_t>(iy) * res + ix];
                v[0] += amp * m.direction[0];
                v[1] += amp * m.direction[1];
            }
        }
    }
    return out;
}

}  // namespace levyns
