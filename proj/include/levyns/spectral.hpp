#pragma once

#include <array>
#include <vector>

// Divergence-free Fourier eigenbasis of the Stokes operator on the unit torus.
// Modes come in cosine/sine pairs over the canonical half-lattice
// {k : ky > 0, or ky = 0 and kx > 0}; each mode is
//   e = sqrt(2) * (k_perp/|k|) * cos(2*pi*k.x)   (or sin),
// an eigenvector of -Delta with eigenvalue lambda = 4*pi^2*|k|^2.
// Fields are real coefficient vectors on this basis, so divergence-freeness
// and zero mean hold by construction.

namespace levyns {

struct WaveVector {
    int kx = 0;
    int ky = 0;

    bool canonical() const { return ky > 0 || (ky == 0 && kx > 0); }
    long long norm2() const {
        return static_cast<long long>(kx) * kx + static_cast<long long>(ky) * ky;
    }
    friend bool operator==(const WaveVector& a, const WaveVector& b) {
        return a.kx == b.kx && a.ky == b.ky;
    }
};

enum class Phase { cosine, sine };

struct BasisMode {
    int index = 0;  // 1-based position j
    WaveVector wave;
    Phase phase = Phase::cosine;
    double lambda = 0.0;
    std::array<double, 2> direction{0.0, 0.0};  // k_perp/|k|, exactly orthogonal to k
};

class Basis {
  public:
    static Basis build(int n);

    int size() const { return static_cast<int>(modes_.size()); }
    const BasisMode& mode(int i) const { return modes_[i]; }  // 0-based
    const std::vector<BasisMode>& modes() const { return modes_; }
    double lambda(int i) const { return modes_[i].lambda; }
    double lambda_min() const { return modes_.front().lambda; }
    // largest wavenumber component over the first m modes (full basis if m < 0)
    int max_wave_component(int m = -1) const;

  private:
    std::vector<BasisMode> modes_;
};

struct SpectralField {
    std::vector<double> a;

    SpectralField() = default;
    explicit SpectralField(int n) : a(n, 0.0) {}

    int size() const { return static_cast<int>(a.size()); }
    double& operator[](int i) { return a[i]; }
    double operator[](int i) const { return a[i]; }
};

// H^gamma norm: (sum_j lambda_j^gamma a_j^2)^{1/2}; gamma=0 is L2, 1 is ||grad u||, -1 the dual norm
double norm(const Basis& basis, const SpectralField& u, double gamma);

double inner(const SpectralField& u, const SpectralField& v);  // L2 inner product

SpectralField project(const SpectralField& u, int m);

// Pointwise velocity on a res x res uniform grid, x = (ix/res, iy/res),
// row-major iy*res + ix. Requires res >= 2*max_wave_component + 1 (else the
// grid aliases the highest modes); violation throws.
std::vector<std::array<double, 2>> evaluate(const Basis& basis, const SpectralField& u, int res);

std::array<double, 2> evaluate_at(const Basis& basis, const SpectralField& u, double x, double y);

}  // namespace levyns
