#pragma once

#include "levyns/spectral.hpp"

// Projected nonlinear term Pi_m((u . grad) u) for band-limited fields.
//
// In Fourier variables the term is the exact convolution
//   w_hat(k) = 2*pi*i * sum_p (u_hat(p) . (k - p)) u_hat(k - p),
// and projecting onto the divergence-free basis modes applies the Leray
// projection implicitly. Three interchangeable backends:
//   serial      - direct convolution, reference implementation
//   openmp      - same arithmetic parallelized over target waves (bitwise
//                 identical to serial: targets are independent)
//   collocation - FFT pseudo-spectral product on a grid padded past the
//                 2/3 rule (N >= 3K+1), alias-free hence also exact

namespace levyns {

enum class NonlinearBackend { serial, openmp, collocation };

SpectralField nonlinear_term(const Basis& basis, const SpectralField& u, int m,
                             NonlinearBackend backend = NonlinearBackend::serial);

// single coefficient <(u.grad)u, e_j>_0, 1-based j
double nonlinear_coefficient(const Basis& basis, const SpectralField& u, int j);

// weak-form pairing <u (x) u, grad e_j>_0; equals -<(u.grad)u, e_j>_0 for
// divergence-free u (integration by parts)
double weak_nonlinear_pairing(const Basis& basis, const SpectralField& u, int j);

}  // namespace levyns
