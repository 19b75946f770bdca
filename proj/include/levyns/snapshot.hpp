#pragma once

#include <iosfwd>
#include <string>

#include "levyns/spectral.hpp"

// Text snapshot of a spectral field:
//
//   # levy-ns field v1, n=<n>, theta=<theta>, t=<time>
//   1,0,1,c,39.478417604357432,0.125
//   ...
//
// one row per mode, `j,kx,ky,phase,lambda,a_j` with phase in {c,s} and every
// real printed with 17 significant digits so doubles round-trip bit-exactly.
// The reader validates each row against the canonical basis of size n, so a
// snapshot cannot silently re-enter a run with a different mode ordering.

namespace levyns {

struct FieldSnapshot {
    int n = 0;
    double theta = 1.0;
    double t = 0.0;
    SpectralField field;
};

void write_field_snapshot(std::ostream& os, const Basis& basis, const SpectralField& u,
                          double theta, double t);
void write_field_snapshot(const std::string& path, const Basis& basis,
                          const SpectralField& u, double theta, double t);

// Throws std::runtime_error naming the offending 1-based line on any header
// or row mismatch.
FieldSnapshot read_field_snapshot(std::istream& is);
FieldSnapshot read_field_snapshot(const std::string& path);

// 17 significant digits; parses back to the identical double
std::string format_double17(double x);

// shortest decimal that round-trips (std::to_chars); used by the CSV writers,
// which need determinism and fidelity but not fixed width
std::string format_double(double x);

}  // namespace levyns
