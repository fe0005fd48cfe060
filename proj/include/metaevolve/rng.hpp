#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metaevolve {

// Deterministic PRNG used by every randomized component of the engine.
//
// SplitMix64 keeps the whole stream state in one 64-bit word, so a stream
// can be checkpointed into an event log and restored exactly. Named
// substreams are derived from (master seed, label); consumers drawing from
// separate labels never perturb each other, which keeps replay stable when
// a new consumer is added.
class Rng {
public:
    Rng() : state_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t raw_state) : state_(raw_state) {}

    static Rng substream(std::uint64_t master_seed, std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return Rng(mix(master_seed + 0x632be59bd9b4e019ull * h));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform index in [0, n). Fixed-point multiply keeps the mapping
    // platform-independent.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: empty range");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller without spare caching: two u64 draws per call, so the
    // stream position is a pure function of the call count.
    double normal(double mean, double sigma) {
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

    std::string checkpoint() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xf];
            v >>= 4;
        }
        return out;
    }

    static Rng from_checkpoint(const std::string& hex) {
        if (hex.size() != 16) throw std::invalid_argument("rng checkpoint: expected 16 hex chars");
        std::uint64_t v = 0;
        for (char c : hex) {
            v <<= 4;
            if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
            else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
            else throw std::invalid_argument("rng checkpoint: bad hex digit");
        }
        return Rng(v);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace metaevolve
