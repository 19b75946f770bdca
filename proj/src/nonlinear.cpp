#include "levyns/nonlinear.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace levyns {

namespace {

using cplx = std::complex<double>;

// Dense complex velocity spectrum on the lattice [-K,K]^2.
struct HatGrid {
    int K = 0;
    int W = 0;  // 2K+1
    std::vector<cplx> ux, uy;

    explicit HatGrid(int kmax) : K(kmax), W(2 * kmax + 1) {
        ux.assign(static_cast<std::size_t>(W) * W, cplx(0.0, 0.0));
        uy.assign(static_cast<std::size_t>(W) * W, cplx(0.0, 0.0));
    }
    std::size_t idx(int kx, int ky) const {
        return static_cast<std::size_t>(ky + K) * W + (kx + K);
    }
    bool inside(int kx, int ky) const { return std::abs(kx) <= K && std::abs(ky) <= K; }
};

// Real coefficients to complex spectrum: for a wave k with cosine/sine
// amplitudes (ac, as) and direction d,
//   u_hat(k)  = (ac - i*as)/sqrt(2) * d,   u_hat(-k) = conj(u_hat(k)).
HatGrid build_hat(const Basis& basis, const SpectralField& u) {
    HatGrid hat(std::max(1, basis.max_wave_component(u.size())));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        const BasisMode& m = basis.mode(i);
        const cplx coef = (m.phase == Phase::cosine) ? cplx(u[i] * inv_sqrt2, 0.0)
                                                     : cplx(0.0, -u[i] * inv_sqrt2);
        const std::size_t ip = hat.idx(m.wave.kx, m.wave.ky);
        const std::size_t im = hat.idx(-m.wave.kx, -m.wave.ky);
        hat.ux[ip] += coef * m.direction[0];
        hat.uy[ip] += coef * m.direction[1];
        hat.ux[im] += std::conj(coef) * m.direction[0];
        hat.uy[im] += std::conj(coef) * m.direction[1];
    }
    return hat;
}

// w_hat(k) . d for one target wave, by direct convolution over the source lattice
cplx convolve_target(const HatGrid& hat, const std::vector<WaveVector>& sources, int kx, int ky,
                     const std::array<double, 2>& dir) {
    cplx wx(0.0, 0.0), wy(0.0, 0.0);
    for (const WaveVector& s : sources) {
        for (int sign = 0; sign < 2; ++sign) {
            const int px = sign ? -s.kx : s.kx;
            const int py = sign ? -s.ky : s.ky;
            const int qx = kx - px;
            const int qy = ky - py;
            if (!hat.inside(qx, qy)) continue;
            const std::size_t iq = hat.idx(qx, qy);
            const cplx qux = hat.ux[iq];
            const cplx quy = hat.uy[iq];
            if (qux == cplx(0.0, 0.0) && quy == cplx(0.0, 0.0)) continue;
            const std::size_t ip = hat.idx(px, py);
            const cplx dot = hat.ux[ip] * static_cast<double>(qx) +
                             hat.uy[ip] * static_cast<double>(qy);
            wx += dot * qux;
            wy += dot * quy;
        }
    }
    const cplx two_pi_i(0.0, 2.0 * M_PI);
    return two_pi_i * (wx * dir[0] + wy * dir[1]);
}

// distinct canonical waves among the first m modes, with their mode offsets
struct TargetWave {
    WaveVector wave;
    std::array<double, 2> dir;
    int cos_index = -1;  // 0-based coefficient slots, -1 if absent
    int sin_index = -1;
};

std::vector<TargetWave> collect_waves(const Basis& basis, int m) {
    std::vector<TargetWave> out;
    for (int i = 0; i < m; ++i) {
        const BasisMode& mode = basis.mode(i);
        if (out.empty() || !(out.back().wave == mode.wave)) {
            out.push_back(TargetWave{mode.wave, mode.direction, -1, -1});
        }
        if (mode.phase == Phase::cosine)
            out.back().cos_index = i;
        else
            out.back().sin_index = i;
    }
    return out;
}

std::vector<WaveVector> source_waves(const Basis& basis, int n) {
    std::vector<WaveVector> out;
    for (int i = 0; i < n; ++i) {
        const WaveVector w = basis.mode(i).wave;
        if (out.empty() || !(out.back() == w)) out.push_back(w);
    }
    return out;
}

void store_target(SpectralField& b, const TargetWave& t, cplx wdot) {
    const double sqrt2 = std::sqrt(2.0);
    if (t.cos_index >= 0) b[t.cos_index] = sqrt2 * wdot.real();
    if (t.sin_index >= 0) b[t.sin_index] = -sqrt2 * wdot.imag();
}

SpectralField convolution_backend(const Basis& basis, const SpectralField& u, int m,
                                  bool parallel) {
    const HatGrid hat = build_hat(basis, u);
    const std::vector<WaveVector> sources = source_waves(basis, u.size());
    const std::vector<TargetWave> targets = collect_waves(basis, m);
    SpectralField b(m);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < static_cast<int>(targets.size()); ++t) {
            const cplx wdot = convolve_target(hat, sources, targets[t].wave.kx,
                                              targets[t].wave.ky, targets[t].dir);
            store_target(b, targets[t], wdot);
        }
    } else {
        for (const TargetWave& t : targets) {
            const cplx wdot = convolve_target(hat, sources, t.wave.kx, t.wave.ky, t.dir);
            store_target(b, t, wdot);
        }
    }
    return b;
}

int pad_size(int kmax) {
    int n = 3 * kmax + 1;
    // bump to the next 5-smooth size for FFT efficiency
    for (;; ++n) {
        int r = n;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return n;
    }
}

SpectralField collocation_backend(const Basis& basis, const SpectralField& u, int m) {
    const int K = std::max(1, basis.max_wave_component(u.size()));
    const int N = pad_size(K);
    const std::size_t total = static_cast<std::size_t>(N) * N;

    auto wrap = [N](int k) { return (k + N) % N; };
    auto alloc = [total]() {
        return static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    };

    // spectra: velocity (2) and the four derivatives d_l u_m
    fftw_complex* buf[6];
    for (auto& p : buf) p = alloc();
    for (int f = 0; f < 6; ++f)
        for (std::size_t i = 0; i < total; ++i) buf[f][i][0] = buf[f][i][1] = 0.0;

    const HatGrid hat = build_hat(basis, u);
    for (int ky = -K; ky <= K; ++ky) {
        for (int kx = -K; kx <= K; ++kx) {
            const cplx vx = hat.ux[hat.idx(kx, ky)];
            const cplx vy = hat.uy[hat.idx(kx, ky)];
            if (vx == cplx(0.0, 0.0) && vy == cplx(0.0, 0.0)) continue;
            const std::size_t g = static_cast<std::size_t>(wrap(ky)) * N + wrap(kx);
            const cplx ikx(0.0, 2.0 * M_PI * kx);
            const cplx iky(0.0, 2.0 * M_PI * ky);
            const cplx vals[6] = {vx, vy, ikx * vx, iky * vx, ikx * vy, iky * vy};
            for (int f = 0; f < 6; ++f) {
                buf[f][g][0] = vals[f].real();
                buf[f][g][1] = vals[f].imag();
            }
        }
    }

    for (int f = 0; f < 6; ++f) {
        fftw_plan plan = fftw_plan_dft_2d(N, N, buf[f], buf[f], FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    // w = (u.grad)u pointwise; imag parts are rounding noise by conjugate symmetry
    fftw_complex* wx = alloc();
    fftw_complex* wy = alloc();
    for (std::size_t i = 0; i < total; ++i) {
        const double ux = buf[0][i][0], uy = buf[1][i][0];
        wx[i][0] = ux * buf[2][i][0] + uy * buf[3][i][0];
        wx[i][1] = 0.0;
        wy[i][0] = ux * buf[4][i][0] + uy * buf[5][i][0];
        wy[i][1] = 0.0;
    }
    for (auto* p : {wx, wy}) {
        fftw_plan plan = fftw_plan_dft_2d(N, N, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    const double scale = 1.0 / static_cast<double>(total);
    SpectralField b(m);
    for (const TargetWave& t : collect_waves(basis, m)) {
        const std::size_t g =
            static_cast<std::size_t>(wrap(t.wave.ky)) * N + wrap(t.wave.kx);
        const cplx whx(wx[g][0] * scale, wx[g][1] * scale);
        const cplx why(wy[g][0] * scale, wy[g][1] * scale);
        store_target(b, t, whx * t.dir[0] + why * t.dir[1]);
    }

    for (auto* p : buf) fftw_free(p);
    fftw_free(wx);
    fftw_free(wy);
    return b;
}

}  // namespace

SpectralField nonlinear_term(const Basis& basis, const SpectralField& u, int m,
                             NonlinearBackend backend) {
    if (m < 1 || m > basis.size() || u.size() > basis.size())
        throw std::invalid_argument("nonlinear_term: size mismatch");
    switch (backend) {
        case NonlinearBackend::serial:
            return convolution_backend(basis, u, m, false);
        case NonlinearBackend::openmp:
            return convolution_backend(basis, u, m, true);
        case NonlinearBackend::collocation:
            return collocation_backend(basis, u, m);
    }
    throw std::logic_error("unreachable");
}

double nonlinear_coefficient(const Basis& basis, const SpectralField& u, int j) {
    if (j < 1 || j > basis.size()) throw std::invalid_argument("mode index out of range");
    const HatGrid hat = build_hat(basis, u);
    const std::vector<WaveVector> sources = source_waves(basis, u.size());
    const BasisMode& mode = basis.mode(j - 1);
    const cplx wdot =
        convolve_target(hat, sources, mode.wave.kx, mode.wave.ky, mode.direction);
    const double sqrt2 = std::sqrt(2.0);
    return (mode.phase == Phase::cosine) ? sqrt2 * wdot.real() : -sqrt2 * wdot.imag();
}

double weak_nonlinear_pairing(const Basis& basis, const SpectralField& u, int j) {
    return -nonlinear_coefficient(basis, u, j);
}

}  // namespace levyns
