#pragma once

#include <random>

#include "qmc/common.hpp"

namespace qmc {
namespace detail {

inline const std::vector<std::uint32_t>& prime_table() {
    static const std::vector<std::uint32_t> primes = [] {
        std::vector<std::uint32_t> p;
        std::vector<bool> sieve(8000, true);
        for (std::uint32_t q = 2; q < sieve.size(); ++q) {
            if (!sieve[q]) continue;
            p.push_back(q);
            for (std::uint32_t r = q * q; r < sieve.size(); r += q) sieve[r] = false;
        }
        return p;  // 1007 primes below 8000
    }();
    return primes;
}

}  // namespace detail

inline constexpr int kHaltonDigits = 48;

// Van der Corput radical inverse in base p_j per dimension; digit_shift adds a
// seeded random digit vector modulo p_j digitwise (Hofert-Lemieux style).
inline PointBlock halton_points(std::size_t d, std::uint64_t n_start, std::uint64_t n_end,
                                Randomization rand = {}) {
    const auto& primes = detail::prime_table();
    if (d > primes.size())
        throw capacity_error("halton: dimension " + std::to_string(d) + " exceeds prime table (" +
                             std::to_string(primes.size()) + ")");
    if (n_start > n_end) throw usage_error("halton: n_start > n_end");
    if (rand.kind != RandKind::none && rand.kind != RandKind::digit_shift)
        throw usage_error("halton: randomization must be none or digit_shift");

    std::vector<std::vector<std::uint32_t>> shifts(d);
    if (rand.kind == RandKind::digit_shift) {
        std::mt19937_64 eng(detail::mix_seed(rand.seed, 0x4a17));
        for (std::size_t k = 0; k < d; ++k) {
            shifts[k].resize(kHaltonDigits);
            std::uniform_int_distribution<std::uint32_t> dig(0, primes[k] - 1);
            for (auto& s : shifts[k]) s = dig(eng);
        }
    }

    PointBlock blk;
    blk.d = d;
    blk.family = Family::halton;
    blk.seed = rand.seed;
    blk.rand_kind = rand.kind;
    blk.n_start = n_start;
    blk.n_end = n_end;
    blk.values.resize((n_end - n_start) * d);
    blk.origin_warning = (rand.kind == RandKind::none && n_start == 0 && n_end > 0);

    for (std::uint64_t i = n_start; i < n_end; ++i) {
        auto row = blk.row(i - n_start);
        for (std::size_t k = 0; k < d; ++k) {
            const double p = primes[k];
            double v = 0.0, w = 1.0 / p;
            std::uint64_t rem = i;
            for (int dig = 0; dig < kHaltonDigits && (rem || rand.kind == RandKind::digit_shift);
                 ++dig) {
                std::uint64_t digit = rem % primes[k];
                rem /= primes[k];
                if (rand.kind == RandKind::digit_shift)
                    digit = (digit + shifts[k][dig]) % primes[k];
                v += static_cast<double>(digit) * w;
                w /= p;
                if (w < 1e-18) break;
            }
            row[k] = v < 1.0 ? v : std::nextafter(1.0, 0.0);
        }
    }
    return blk;
}

}  // namespace qmc
