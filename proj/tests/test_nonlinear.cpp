#include <cmath>

#include "doctest.h"
#include "levyns/nonlinear.hpp"
#include "levyns/rng.hpp"
#include "levyns/spectral.hpp"
#include "oracles.hpp"

using namespace levyns;

namespace {

SpectralField random_field(int n, std::uint64_t seed) {
    auto rng = make_rng(seed, StreamPurpose::initial);
    SpectralField u(n);
    for (int i = 0; i < n; ++i) u[i] = 2.0 * rng.uniform01() - 1.0;
    return u;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (int i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

TEST_SUITE_BEGIN("nonlinear");

TEST_CASE("single shear mode self-advects to zero") {
    const Basis b = Basis::build(4);
    SpectralField u(4);
    u[2] = 1.3;  // wave (1,0) cosine: u = A cos(2 pi x) (0,1), (u.grad)u = A cos d_y(...) = 0
    const SpectralField w = nonlinear_term(b, u, 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(w[i]) < 1e-14);
    const SpectralField wq = oracles::nonlinear_term_quadrature(b, u, 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(wq[i]) < 1e-12);
}

TEST_CASE("zero field maps to zero") {
    const Basis b = Basis::build(8);
    const SpectralField w = nonlinear_term(b, SpectralField(8), 8);
    for (int i = 0; i < 8; ++i) CHECK(w[i] == 0.0);
}

TEST_CASE("convolution agrees with the real-space quadrature oracle") {
    for (int n : {4, 8, 16}) {
        const Basis b = Basis::build(n);
        for (std::uint64_t seed = 20; seed < 23; ++seed) {
            const SpectralField u = random_field(n, seed);
            const SpectralField w = nonlinear_term(b, u, n);
            const SpectralField wq = oracles::nonlinear_term_quadrature(b, u, n);
            CHECK(max_abs_diff(w, wq) < 1e-8);
        }
    }
}

TEST_CASE("projection truncates the same convolution") {
    const Basis b = Basis::build(16);
    const SpectralField u = random_field(16, 24);
    const SpectralField full = nonlinear_term(b, u, 16);
    const SpectralField part = nonlinear_term(b, u, 6);
    for (int i = 0; i < 6; ++i) CHECK(part[i] == doctest::Approx(full[i]).epsilon(1e-14));
}

TEST_CASE("openmp backend is bitwise identical to serial") {
    for (int n : {8, 32}) {
        const Basis b = Basis::build(n);
        const SpectralField u = random_field(n, 30);
        const SpectralField ws = nonlinear_term(b, u, n, NonlinearBackend::serial);
        const SpectralField wp = nonlinear_term(b, u, n, NonlinearBackend::openmp);
        for (int i = 0; i < n; ++i) CHECK(ws[i] == wp[i]);
    }
}

TEST_CASE("collocation backend agrees with convolution") {
    for (int n : {8, 32, 64}) {
        const Basis b = Basis::build(n);
        const SpectralField u = random_field(n, 31);
        const SpectralField ws = nonlinear_term(b, u, n, NonlinearBackend::serial);
        const SpectralField wc = nonlinear_term(b, u, n, NonlinearBackend::collocation);
        CHECK(max_abs_diff(ws, wc) < 1e-10);
    }
}

TEST_CASE("energy orthogonality <B(u,u),u> = 0") {
    for (int n : {8, 16, 32}) {
        const Basis b = Basis::build(n);
        for (std::uint64_t seed = 40; seed < 44; ++seed) {
            const SpectralField u = random_field(n, seed);
            const SpectralField w = nonlinear_term(b, u, n);
            const double ip = inner(w, u);
            const double scale = norm(b, u, 0.0) * norm(b, u, 0.0) * norm(b, u, 1.0);
            CHECK(std::abs(ip) < 1e-10 * scale);
        }
    }
}

TEST_CASE("band-limited field against a larger ambient basis keeps orthogonality") {
    const Basis b = Basis::build(32);
    SpectralField u = random_field(32, 45);
    for (int i = 12; i < 32; ++i) u[i] = 0.0;  // supported on the first 12 modes
    const SpectralField w = nonlinear_term(b, u, 12);
    double ip = 0.0;
    for (int i = 0; i < 12; ++i) ip += w[i] * u[i];
    const double scale = norm(b, u, 0.0) * norm(b, u, 0.0) * norm(b, u, 1.0);
    CHECK(std::abs(ip) < 1e-10 * scale);
}

TEST_CASE("single-coefficient path matches the full term") {
    const Basis b = Basis::build(16);
    const SpectralField u = random_field(16, 50);
    const SpectralField w = nonlinear_term(b, u, 16);
    for (int j = 1; j <= 16; ++j)
        CHECK(nonlinear_coefficient(b, u, j) == doctest::Approx(w[j - 1]).epsilon(1e-14));
}

TEST_CASE("weak pairing equals minus the strong coefficient and matches quadrature") {
    const Basis b = Basis::build(12);
    const SpectralField u = random_field(12, 51);
    for (int j = 1; j <= 12; ++j) {
        const double weak = weak_nonlinear_pairing(b, u, j);
        CHECK(weak == doctest::Approx(-nonlinear_coefficient(b, u, j)).epsilon(1e-13));
        CHECK(std::abs(weak - oracles::weak_pairing_quadrature(b, u, j)) < 1e-10);
    }
}

TEST_SUITE_END();
