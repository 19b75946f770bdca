#include "levyns/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "levyns/snapshot.hpp"

namespace levyns {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
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

struct Entry {
    std::string value;
    long long line = 0;
    bool used = false;
};

// section -> key -> entry; the parse keeps going after errors so every
// violation is reported at once
struct Doc {
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::vector<std::string> errors;
};

Doc parse_doc(const std::string& text) {
    Doc doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    long long line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                doc.errors.push_back("line " + std::to_string(line) + ": malformed section header \"" + s + "\"");
                continue;
            }
            section = trim(s.substr(1, s.size() - 2));
            doc.sections[section];  // empty sections are legal
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            doc.errors.push_back("line " + std::to_string(line) + ": expected key = value, got \"" + s + "\"");
            continue;
        }
        if (section.empty()) {
            doc.errors.push_back("line " + std::to_string(line) + ": key outside any [section]");
            continue;
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) {
            doc.errors.push_back("line " + std::to_string(line) + ": empty key");
            continue;
        }
        auto [it, inserted] = doc.sections[section].emplace(key, Entry{value, line, false});
        if (!inserted)
            doc.errors.push_back("line " + std::to_string(line) + ": duplicate key " + section + "." + key +
                                 " (first set on line " + std::to_string(it->second.line) + ")");
    }
    return doc;
}

// typed readers; each failure lands in `errs` tagged with section.key and line
class Reader {
  public:
    Reader(Doc& doc, std::vector<std::string>& errs) : doc_(doc), errs_(errs) {}

    const Entry* find(const std::string& section, const std::string& key) {
        auto s = doc_.sections.find(section);
        if (s == doc_.sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    }

    template <typename T, typename Parse>
    void get(const std::string& section, const std::string& key, T& out, Parse parse) {
        const Entry* e = find(section, key);
        if (!e) return;
        try {
            out = parse(e->value);
        } catch (const std::exception& ex) {
            errs_.push_back(section + "." + key + " (line " + std::to_string(e->line) + "): " + ex.what());
        }
    }

    // every key that was never consumed is a spelling error worth naming
    void flag_unused(const std::vector<std::string>& known_sections) {
        for (const auto& [sec, keys] : doc_.sections) {
            bool known = false;
            for (const auto& k : known_sections) known = known || k == sec;
            if (!known) {
                errs_.push_back("unknown section [" + sec + "]");
                continue;
            }
            for (const auto& [key, e] : keys)
                if (!e.used)
                    errs_.push_back("unknown key " + sec + "." + key + " (line " + std::to_string(e.line) + ")");
        }
    }

  private:
    Doc& doc_;
    std::vector<std::string>& errs_;
};

double to_double(const std::string& tok) {
    const std::string t = trim(tok);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw std::runtime_error("cannot parse real number \"" + t + "\"");
    return v;
}

long long to_int(const std::string& tok) {
    const std::string t = trim(tok);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw std::runtime_error("cannot parse integer \"" + t + "\"");
    return v;
}

std::uint64_t to_u64(const std::string& tok) {
    const std::string t = trim(tok);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw std::runtime_error("cannot parse unsigned integer \"" + t + "\"");
    return v;
}

std::vector<double> to_double_list(const std::string& tok) {
    std::vector<double> out;
    for (const auto& p : split(tok, ',')) out.push_back(to_double(p));
    if (out.empty()) throw std::runtime_error("empty list");
    return out;
}

std::pair<double, double> to_range(const std::string& tok) {
    const auto p = split(tok, ':');
    if (p.size() != 2) throw std::runtime_error("expected <a>:<b>, got \"" + trim(tok) + "\"");
    return {to_double(p[0]), to_double(p[1])};
}

bool to_on_off(const std::string& tok) {
    if (tok == "on") return true;
    if (tok == "off") return false;
    throw std::runtime_error("expected on or off, got \"" + tok + "\"");
}

InitialCondition to_initial(const std::string& tok) {
    if (tok == "zero") return InitialCondition::zero();
    const auto p = split(tok, ':');
    if (p[0] == "single-mode") {
        if (p.size() != 5) throw std::runtime_error("expected single-mode:<kx>:<ky>:<c|s>:<amp>");
        Phase ph;
        if (p[3] == "c") ph = Phase::cosine;
        else if (p[3] == "s") ph = Phase::sine;
        else throw std::runtime_error("phase must be c or s, got \"" + p[3] + "\"");
        return InitialCondition::single_mode(
            WaveVector{static_cast<int>(to_int(p[1])), static_cast<int>(to_int(p[2]))}, ph,
            to_double(p[4]));
    }
    if (p[0] == "random-sobolev") {
        if (p.size() != 3) throw std::runtime_error("expected random-sobolev:<gamma>:<norm>");
        return InitialCondition::random_sobolev(to_double(p[1]), to_double(p[2]));
    }
    throw std::runtime_error(
        "unknown initial \"" + tok +
        "\" (expected zero, single-mode:<kx>:<ky>:<c|s>:<amp>, random-sobolev:<gamma>:<norm>, field:<path>)");
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

ConfigResult load_run_config(const std::string& text) {
    ConfigResult res;
    RunConfig& rc = res.config;
    rc.text = text;
    rc.hash = sha256_hex(text);

    Doc doc = parse_doc(text);
    res.errors = doc.errors;
    Reader rd(doc, res.errors);
    SolverConfig& sc = rc.solver;

    // [spectral]
    rd.get("spectral", "n", sc.n, [](const std::string& v) { return static_cast<int>(to_int(v)); });

    // [noise]
    {
        bool enabled = !sc.noise_off;
        rd.get("noise", "enabled", enabled, to_on_off);
        sc.noise_off = !enabled;
        rd.get("noise", "family", sc.noise.measure.family, [](const std::string& v) {
            if (v == "stable") return LevyFamily::symmetric_stable;
            if (v == "truncated-stable") return LevyFamily::truncated_stable;
            throw std::runtime_error("expected stable or truncated-stable, got \"" + v + "\"");
        });
        rd.get("noise", "alpha", sc.noise.measure.alpha, to_double);
        rd.get("noise", "intensity", sc.noise.measure.intensity, to_double);
        rd.get("noise", "truncation", sc.noise.measure.r_trunc, to_double);
        rd.get("noise", "beta_rule", sc.noise.betas, [](const std::string& v) {
            if (v.rfind("power:", 0) == 0)
                return CoefficientSequence::power_rule(to_double(v.substr(6)));
            if (v.rfind("list:", 0) == 0)
                return CoefficientSequence::explicit_list(to_double_list(v.substr(5)));
            throw std::runtime_error("expected power:<r> or list:<v1,v2,...>, got \"" + v + "\"");
        });
        rd.get("noise", "theta", sc.noise.theta, to_double);
        rd.get("noise", "backend", sc.noise_settings.backend, [](const std::string& v) {
            if (v == "exact") return NoiseBackend::exact;
            if (v == "levy-ito") return NoiseBackend::levy_ito;
            throw std::runtime_error("expected exact or levy-ito, got \"" + v + "\"");
        });
        rd.get("noise", "small_jump_cutoff", sc.noise_settings.small_jump_cutoff, to_double);
    }

    // [solver]
    rd.get("solver", "dt", sc.dt, to_double);
    rd.get("solver", "T", sc.horizon, to_double);
    rd.get("solver", "scheme", sc.scheme, [](const std::string& v) {
        if (v == "exponential-euler") return Scheme::exponential_euler;
        if (v == "semi-implicit-euler") return Scheme::semi_implicit_euler;
        throw std::runtime_error("expected exponential-euler or semi-implicit-euler, got \"" + v + "\"");
    });
    if (const Entry* e = rd.find("solver", "initial")) {
        try {
            if (e->value.rfind("field:", 0) == 0) {
                // snapshot re-ingestion: the stored field becomes the initial
                // condition (projected onto the run basis by the solver)
                const std::string path = e->value.substr(6);
                if (path.empty()) throw std::runtime_error("expected field:<path>");
                sc.initial = InitialCondition::from_field(read_field_snapshot(path).field);
            } else {
                sc.initial = to_initial(e->value);
            }
        } catch (const std::exception& ex) {
            res.errors.push_back("solver.initial (line " + std::to_string(e->line) + "): " + ex.what());
        }
    }
    rd.get("solver", "seed", sc.seed, to_u64);
    rd.get("solver", "snapshot_stride", sc.snapshot_stride, to_int);

    // [diagnostics]
    rd.get("diagnostics", "horizons", rc.horizons, to_double_list);
    rd.get("diagnostics", "trajectories", rc.moment_trajectories,
           [](const std::string& v) { return static_cast<int>(to_int(v)); });
    rd.get("diagnostics", "mode", rc.cf_mode,
           [](const std::string& v) { return static_cast<int>(to_int(v)); });
    rd.get("diagnostics", "xi", rc.cf_xi, to_double_list);
    rd.get("diagnostics", "pairs", rc.cf_pairs, [](const std::string& v) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : split(v, ',')) out.push_back(to_range(p));
        return out;
    });
    rd.get("diagnostics", "cf_trajectories", rc.cf_trajectories,
           [](const std::string& v) { return static_cast<int>(to_int(v)); });

    // [invariant]
    rd.get("invariant", "burn_in", rc.burn_in, to_double);
    rd.get("invariant", "stride", rc.stride, to_int);
    rd.get("invariant", "trajectories", rc.invariant_trajectories,
           [](const std::string& v) { return static_cast<int>(to_int(v)); });
    rd.get("invariant", "windows", rc.windows, [](const std::string& v) {
        std::vector<Window> out;
        for (const auto& p : split(v, ',')) {
            const auto r = to_range(p);
            out.push_back(Window{r.first, r.second});
        }
        return out;
    });
    rd.get("invariant", "observables", rc.observables, [](const std::string& v) {
        std::vector<ObservableSpec> out;
        for (const auto& p : split(v, ',')) out.push_back(ObservableSpec::parse(trim(p)));
        return out;
    });

    rd.flag_unused({"spectral", "noise", "solver", "diagnostics", "invariant"});

    // solver-level invariants, rephrasing the H_theta gate so the verdict
    // names the hypothesis the way the config reader documents it
    for (auto& e : validate_config(sc)) {
        const std::string prefix = "hypothesis H_theta fails: ";
        if (e.rfind(prefix, 0) == 0)
            res.errors.push_back("noise: H_theta diverges (" + e.substr(prefix.size()) + ")");
        else
            res.errors.push_back(std::move(e));
    }

    if (!sc.noise_off && sc.noise.theta > 0.0 && sc.noise.theta <= 1.0 &&
        validate_measure(sc.noise.measure).empty())
        res.h_theta = h_theta(sc.noise);

    // semi-implicit damping is only first-order accurate; past dt = 0.5/lambda_n
    // the largest eigenvalue is resolved by fewer than two steps per e-fold
    if (sc.scheme == Scheme::semi_implicit_euler && sc.n >= 1 && sc.dt > 0.0) {
        const double lam_n = Basis::build(sc.n).lambda(sc.n - 1);
        if (sc.dt > 0.5 / lam_n)
            res.warnings.push_back("solver.dt = " + std::to_string(sc.dt) +
                                   " exceeds 0.5/lambda_n = " + std::to_string(0.5 / lam_n) +
                                   " for the semi-implicit scheme; stiff modes are under-resolved");
    }

    return res;
}

ConfigResult load_run_config_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return load_run_config(buf.str());
}

}  // namespace levyns
