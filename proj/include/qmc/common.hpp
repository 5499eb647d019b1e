#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc {

enum class Family { lattice, digital_net, halton, iid };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::lattice: return "lattice";
        case Family::digital_net: return "net";
        case Family::halton: return "halton";
        case Family::iid: return "iid";
    }
    return "?";
}

enum class RandKind {
    none,
    shift_mod1,              // lattice
    digital_shift,           // digital net
    lms_with_digital_shift,  // digital net
    digit_shift              // Halton
};

struct Randomization {
    RandKind kind = RandKind::none;
    std::uint64_t seed = 0;
};

// Requested index range or dimension exceeds what the generating data supports.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid combination of options (e.g. randomization kind vs. sequence family).
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A unit-cube coordinate of exactly 0 or 1 reached a transform with an
// unbounded inverse CDF.
struct boundary_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// n x d block of points, row-major, with generation metadata.
struct PointBlock {
    std::vector<double> values;
    std::size_t d = 0;
    std::string domain = "unit_cube";
    Family family = Family::iid;
    std::string ordering;
    std::uint64_t seed = 0;
    std::uint64_t n_start = 0, n_end = 0;
    RandKind rand_kind = RandKind::none;
    // set when an unrandomized block contains the origin (index 0)
    bool origin_warning = false;

    std::size_t n() const { return d == 0 ? 0 : values.size() / d; }
    double& at(std::size_t i, std::size_t k) { return values[i * d + k]; }
    double at(std::size_t i, std::size_t k) const { return values[i * d + k]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
};

// componentwise (x + y) mod 1
inline std::vector<double> lattice_add(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw usage_error("lattice_add: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double s = x[k] + y[k];
        out[k] = s - std::floor(s);
    }
    return out;
}

// componentwise XOR of the fixed-point binary expansions, `precision` bits
inline std::vector<double> digitwise_add(std::span<const double> x, std::span<const double> y,
                                         int precision = 53) {
    if (x.size() != y.size()) throw usage_error("digitwise_add: dimension mismatch");
    if (precision < 1 || precision > 53) throw usage_error("digitwise_add: precision must be in [1,53]");
    const double scale = std::ldexp(1.0, precision);
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        auto a = static_cast<std::uint64_t>(std::llround(x[k] * scale));
        auto b = static_cast<std::uint64_t>(std::llround(y[k] * scale));
        out[k] = static_cast<double>(a ^ b) / scale;
    }
    return out;
}

namespace detail {

// SplitMix64; used to derive independent per-purpose seeds
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

}  // namespace qmc
