#pragma once

#include <cmath>
#include <cstdint>

namespace stochrobust {

// Counter-based stream: Philox4x32-10 keyed by the master seed, with the run
// index in the counter. A given (seed, index) pair yields the same sequence no
// matter how runs are scheduled across workers, which is what makes parallel
// ensembles reproducible.
class RngStream {
public:
    RngStream(uint64_t master_seed, uint64_t run_index)
        : key0_(static_cast<uint32_t>(master_seed)),
          key1_(static_cast<uint32_t>(master_seed >> 32)),
          run_lo_(static_cast<uint32_t>(run_index)),
          run_hi_(static_cast<uint32_t>(run_index >> 32)) {}

    uint64_t next_u64() {
        if (have_ >= 2) {
            have_ = 0;
            ++block_;
            fill();
        }
        uint64_t lo = out_[2 * have_];
        uint64_t hi = out_[2 * have_ + 1];
        ++have_;
        return lo | (hi << 32);
    }

    /// Uniform on [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1); safe to pass through log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform_open();
        double u2 = uniform_open();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(6.283185307179586476925286766559 * u2);
    }

    uint64_t below(uint64_t n) { return next_u64() % n; }

private:
    uint32_t key0_, key1_;
    uint32_t run_lo_, run_hi_;
    uint64_t block_ = 0;
    uint32_t out_[4] = {};
    int have_ = 2;  // forces a fill on first use

    static void round(uint32_t& c0, uint32_t& c1, uint32_t& c2, uint32_t& c3,
                      uint32_t k0, uint32_t k1) {
        constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        uint64_t p0 = static_cast<uint64_t>(M0) * c0;
        uint64_t p1 = static_cast<uint64_t>(M1) * c2;
        uint32_t h0 = static_cast<uint32_t>(p0 >> 32), l0 = static_cast<uint32_t>(p0);
        uint32_t h1 = static_cast<uint32_t>(p1 >> 32), l1 = static_cast<uint32_t>(p1);
        uint32_t n0 = h1 ^ c1 ^ k0;
        uint32_t n1 = l1;
        uint32_t n2 = h0 ^ c3 ^ k1;
        uint32_t n3 = l0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    }

    void fill() {
        constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        uint32_t c0 = static_cast<uint32_t>(block_);
        uint32_t c1 = static_cast<uint32_t>(block_ >> 32);
        uint32_t c2 = run_lo_;
        uint32_t c3 = run_hi_;
        uint32_t k0 = key0_, k1 = key1_;
        for (int r = 0; r < 10; ++r) {
            round(c0, c1, c2, c3, k0, k1);
            k0 += W0;
            k1 += W1;
        }
        out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    }
};

/// Deterministic seed derivation for nested stream families (per-evaluation
/// seeds inside an optimizer run, etc.).
inline uint64_t derive_seed(uint64_t master_seed, uint64_t purpose, uint64_t index = 0) {
    RngStream s(master_seed ^ 0x5bf0'3635'dcd0'70a1ull, (purpose << 32) ^ index);
    return s.next_u64();
}

}  // namespace stochrobust
