#pragma once

// Counter-based RNG (Philox-4x32-10) with independent streams. A draw is a
// pure function of (seed, stream, counter), so replicate `i` on stream `i`
// produces identical output whether replicates run serially or on any number
// of workers.

#include <cmath>
#include <cstdint>

namespace signlab {

class PhiloxRng {
public:
    PhiloxRng(std::uint64_t seed, std::uint64_t stream)
        : key0_((std::uint32_t)seed), key1_((std::uint32_t)(seed >> 32)),
          ctr2_((std::uint32_t)stream), ctr3_((std::uint32_t)(stream >> 32)) {}

    // uniform on (0, 1), 53-bit resolution, never exactly 0 or 1
    double uniform() {
        if (buf_pos_ >= 2) refill();
        return u53_[buf_pos_++];
    }

    // standard normal via Box-Muller on consecutive uniforms
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = (std::uint64_t)a * b;
        hi = (std::uint32_t)(p >> 32);
        lo = (std::uint32_t)p;
    }

    void refill() {
        std::uint32_t c0 = (std::uint32_t)block_, c1 = (std::uint32_t)(block_ >> 32);
        std::uint32_t c2 = ctr2_, c3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, c0, hi0, lo0);
            mulhilo(0xCD9E8D57u, c2, hi1, lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        ++block_;
        u53_[0] = to_unit(c0, c1);
        u53_[1] = to_unit(c2, c3);
        buf_pos_ = 0;
    }

    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((std::uint64_t)hi << 32) | lo;
        return ((double)(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // 2^-53
    }

    std::uint32_t key0_, key1_, ctr2_, ctr3_;
    std::uint64_t block_ = 0;
    double u53_[2] = {0.0, 0.0};
    int buf_pos_ = 2;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace signlab
