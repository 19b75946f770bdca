#pragma once

#include <cstdint>

// Counter-based random streams. Every consumer derives its own stream from
// (master seed, purpose, trajectory, mode, step), so parallel trajectories and
// per-mode noise draws are reproducible independently of scheduling order.

namespace levyns {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 output function (bijective on 64 bits)
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t chain(std::uint64_t h, std::uint64_t v, std::uint64_t salt) {
    return mix64(h ^ (v * kGolden + salt));
}

}  // namespace detail

// Stream purposes; fixed numbering is part of the reproducibility contract.
enum class StreamPurpose : std::uint64_t {
    noise = 1,        // per (traj, mode, step) noise increments
    initial = 2,      // initial-condition draws
    permutation = 3,  // resampling tests
    sampler = 4,      // standalone sampler checks
    pilot = 5,        // pilot runs (histogram edges, stride tuning)
};

struct StreamKey {
    std::uint64_t master = 0;
    std::uint64_t purpose = 0;
    std::uint64_t traj = 0;
    std::uint64_t mode = 0;
    std::uint64_t step = 0;
};

class CounterRng {
  public:
    CounterRng() = default;
    explicit CounterRng(const StreamKey& k) {
        using namespace detail;
        std::uint64_t h = mix64(k.master + kGolden);
        h = chain(h, k.purpose, 0x8f1bbcdcbfa53e0bull);
        h = chain(h, k.traj, 0xd6e8feb86659fd93ull);
        h = chain(h, k.mode, 0xa5a5a5a5a5a5a5a5ull);
        h = chain(h, k.step, 0xc2b2ae3d27d4eb4full);
        base_ = h;
    }

    std::uint64_t next_u64() { return detail::mix64(base_ + (++ctr_) * detail::kGolden); }

    // strictly inside (0,1); safe for log() and tan()
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller (two uniforms per pair, cached)
    double normal();

  private:
    std::uint64_t base_ = 0;
    std::uint64_t ctr_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline CounterRng make_rng(std::uint64_t master, StreamPurpose p, std::uint64_t traj = 0,
                           std::uint64_t mode = 0, std::uint64_t step = 0) {
    return CounterRng(StreamKey{master, static_cast<std::uint64_t>(p), traj, mode, step});
}

}  // namespace levyns
