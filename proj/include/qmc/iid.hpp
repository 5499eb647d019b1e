#pragma once

#include <random>

#include "qmc/common.hpp"

namespace qmc {

// Stateful IID generator: repeated calls without reseeding return fresh points,
// unlike the indexed LD generators.  Single-owner; not shareable across threads.
class IidGenerator {
public:
    IidGenerator(std::size_t d, std::uint64_t seed)
        : d_(d), seed_(seed), eng_(detail::mix_seed(seed, 0x11d0)) {}

    PointBlock next(std::uint64_t n) {
        PointBlock blk;
        blk.d = d_;
        blk.family = Family::iid;
        blk.seed = seed_;
        blk.n_start = drawn_;
        blk.n_end = drawn_ + n;
        blk.values.resize(n * d_);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (auto& v : blk.values) v = u01(eng_);
        drawn_ += n;
        return blk;
    }

    std::size_t dimension() const { return d_; }

private:
    std::size_t d_;
    std::uint64_t seed_;
    std::uint64_t drawn_ = 0;
    std::mt19937_64 eng_;
};

inline PointBlock iid_points(std::size_t d, std::uint64_t n, std::uint64_t seed) {
    return IidGenerator(d, seed).next(n);
}

}  // namespace qmc
