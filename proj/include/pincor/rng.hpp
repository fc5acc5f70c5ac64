#ifndef PINCOR_RNG_HPP
#define PINCOR_RNG_HPP

#include <cmath>
#include <cstdint>

namespace pincor {

// SplitMix64 step; also used to hash (seed, stream) pairs.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed-splitting rule used everywhere parallel work needs independent
// streams: replica/batch i draws from split_seed(master, i). Documented in
// the CLI help; results are therefore independent of thread count.
inline uint64_t split_seed(uint64_t master, uint64_t stream) {
    uint64_t s = splitmix64(master ^ 0x8f462907e54c11d3ULL);
    return splitmix64(s + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// xoshiro256++ (Blackman/Vigna), seeded via SplitMix64.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        for (auto& w : s_) {
            seed = splitmix64(seed);
            w = seed;
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0,1]; never returns 0 so log() is safe.
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Standard normal stream via Box-Muller, with the paired value cached so the
// draw sequence is fully pinned by the seed (portable across platforms).
class NormalStream {
  public:
    explicit NormalStream(uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.next_uniform();
        const double u2 = rng_.next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Rng& raw() { return rng_; }

  private:
    Rng rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pincor

#endif
