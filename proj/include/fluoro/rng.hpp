#pragma once
// Counter-free splittable RNG.  std::mt19937 + std::*_distribution are not
// bit-stable across standard libraries, and reruns must be byte-identical,
// so all draws go through this.
#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace fluoro {

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x5851f42d4c957f2dull)) {}

    // independent child stream; key selects the branch (setting index, run
    // index, bootstrap index, ...).  Children of distinct keys never collide
    // with each other or with the parent's own sequence.
    Rng sub(uint64_t key) const {
        Rng r(0);
        r.state_ = mix64(state_ ^ mix64(key * 0xd2b74407b1ce6e93ull + 0x632be59bd9b4e019ull));
        r.spare_valid_ = false;
        return r;
    }
    Rng sub(uint64_t k1, uint64_t k2) const { return sub(k1).sub(k2); }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on [0,1) with 53-bit resolution
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1] (safe for log)
    double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    uint64_t below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        // rejection to kill modulo bias
        uint64_t lim = ~uint64_t(0) - (~uint64_t(0) % n);
        uint64_t x;
        do { x = next_u64(); } while (x >= lim);
        return x % n;
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double normal() {
        if (spare_valid_) { spare_valid_ = false; return spare_; }
        double u1 = uniform_pos(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1)), th = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(th);
        spare_valid_ = true;
        return r * std::cos(th);
    }

    // Poisson by inversion for small mean, recursive halving (sum of
    // independent Poissons) above; exact and deterministic at every mean.
    uint64_t poisson(double mean) {
        if (mean < 0) throw std::invalid_argument("poisson mean < 0");
        if (mean == 0) return 0;
        uint64_t n = 0;
        while (mean > 12.0) {
            // split off an exact Poisson(mean/2) piece
            double half = mean * 0.5;
            n += poisson_inv_or_split(half);
            mean -= half;
        }
        return n + poisson_inv(mean);
    }

    // pick one of `n` outcomes with (unnormalized, nonneg) weights
    int choose(const double* w, int n) {
        double tot = 0;
        for (int i = 0; i < n; ++i) tot += w[i];
        double x = uniform() * tot, acc = 0;
        for (int i = 0; i < n; ++i) { acc += w[i]; if (x < acc) return i; }
        return n - 1;
    }

private:
    uint64_t poisson_inv(double mean) {
        double p = std::exp(-mean), cum = p, u = uniform();
        uint64_t k = 0;
        while (u > cum && k < 400) { ++k; p *= mean / double(k); cum += p; }
        return k;
    }
    uint64_t poisson_inv_or_split(double mean) {
        return mean > 12.0 ? poisson(mean) : poisson_inv(mean);
    }

    uint64_t state_;
    double spare_ = 0.0;
    bool spare_valid_ = false;
};

} // namespace fluoro
