#pragma once

#include <cmath>

#include "cultivator/common.hpp"

namespace cultiv {

// Counter-based splittable RNG. Every stream is derived from (seed, stream id)
// so worker counts and merge order never change the sampled bits.
struct Rng {
    u64 state;

    explicit Rng(u64 seed, u64 stream = 0) {
        state = mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull));
    }

    static u64 mix(u64 z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    u64 next() {
        state += 0x9e3779b97f4a7c15ull;
        u64 z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    u64 below(u64 bound) { return next() % bound; }

    bool bernoulli(double p) { return uniform() < p; }

    // Number of failures before the next success of rate p; used to skip
    // through shot batches when sampling rare noise events.
    u64 geometric(double p) {
        if (p <= 0) return ~u64(0);
        if (p >= 1) return 0;
        double u = uniform();
        while (u <= 0) u = uniform();
        return u64(std::log(u) / std::log1p(-p));
    }
};

}  // namespace cultiv
