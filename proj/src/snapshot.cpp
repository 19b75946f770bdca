#include "levyns/snapshot.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace levyns {

namespace {

[[noreturn]] void fail(long long line, const std::string& what) {
    throw std::runtime_error("snapshot line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& tok, long long line) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(line, "cannot parse real number \"" + tok + "\"");
    return v;
}

long long parse_int(const std::string& tok, long long line) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    long long v = 0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail(line, "cannot parse integer \"" + tok + "\"");
    return v;
}

}  // namespace

std::string format_double17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_field_snapshot(std::ostream& os, const Basis& basis, const SpectralField& u,
                          double theta, double t) {
    if (u.size() != basis.size())
        throw std::runtime_error("snapshot: field size does not match the basis");
    os << "# levy-ns field v1, n=" << basis.size() << ", theta=" << format_double17(theta)
       << ", t=" << format_double17(t) << "\n";
    for (int j = 1; j <= basis.size(); ++j) {
        const BasisMode& m = basis.mode(j - 1);
        os << j << ',' << m.wave.kx << ',' << m.wave.ky << ','
           << (m.phase == Phase::cosine ? 'c' : 's') << ',' << format_double17(m.lambda)
           << ',' << format_double17(u[j - 1]) << "\n";
    }
}

void write_field_snapshot(const std::string& path, const Basis& basis,
                          const SpectralField& u, double theta, double t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
    write_field_snapshot(os, basis, u, theta, t);
    os.flush();
    if (!os) throw std::runtime_error("snapshot: write to " + path + " failed");
}

FieldSnapshot read_field_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) fail(1, "empty input");
    FieldSnapshot snap;
    {
        int consumed = 0;
        // %lf round-trips the 17-digit decimals exactly
        const int got = std::sscanf(header.c_str(), "# levy-ns field v1, n=%d, theta=%lf, t=%lf%n",
                                    &snap.n, &snap.theta, &snap.t, &consumed);
        if (got != 3 || consumed != static_cast<int>(header.size()))
            fail(1, "bad header \"" + header + "\" (expected \"# levy-ns field v1, n=<n>, theta=<theta>, t=<t>\")");
    }
    if (snap.n < 1) fail(1, "n must be at least 1");
    const Basis basis = Basis::build(snap.n);
    std::vector<double> coeffs;
    coeffs.reserve(static_cast<std::size_t>(snap.n));
    std::string row;
    long long line = 1;
    while (std::getline(is, row)) {
        ++line;
        if (row.empty()) continue;
        const int j = static_cast<int>(coeffs.size()) + 1;
        if (j > snap.n) fail(line, "more rows than the declared n=" + std::to_string(snap.n));
        const auto tok = split(row, ',');
        if (tok.size() != 6) fail(line, "expected 6 comma-separated fields, got " + std::to_string(tok.size()));
        const BasisMode& m = basis.mode(j - 1);
        if (parse_int(tok[0], line) != j)
            fail(line, "mode index " + tok[0] + " out of order (expected " + std::to_string(j) + ")");
        if (parse_int(tok[1], line) != m.wave.kx || parse_int(tok[2], line) != m.wave.ky)
            fail(line, "wave (" + tok[1] + "," + tok[2] + ") does not match the canonical basis");
        if (tok[3] != "c" && tok[3] != "s") fail(line, "phase must be c or s, got \"" + tok[3] + "\"");
        const Phase ph = tok[3] == "c" ? Phase::cosine : Phase::sine;
        if (ph != m.phase) fail(line, "phase does not match the canonical basis");
        const double lambda = parse_double(tok[4], line);
        if (std::abs(lambda - m.lambda) > 1e-12 * m.lambda)
            fail(line, "lambda " + tok[4] + " does not match the canonical eigenvalue");
        const double a = parse_double(tok[5], line);
        if (!std::isfinite(a)) fail(line, "coefficient is not finite");
        coeffs.push_back(a);
    }
    if (static_cast<int>(coeffs.size()) != snap.n)
        fail(line, "got " + std::to_string(coeffs.size()) + " rows, expected n=" + std::to_string(snap.n));
    snap.field.a = std::move(coeffs);
    return snap;
}

FieldSnapshot read_field_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    return read_field_snapshot(is);
}

}  // namespace levyns
