#pragma once

#include <fstream>
#include <random>
#include <sstream>

#include "qmc/common.hpp"

namespace qmc {

// Generating vector h of a rank-1 base-2 extensible lattice.  The generators
// of the point group are Z_{2^k} = {2^{-k-1} h mod 1}.
struct LatticeGenVector {
    std::vector<std::uint64_t> h;
    int m_max = 20;

    std::size_t dimension() const { return h.size(); }
};

enum class LatticeOrdering { natural, linear };

// One integer per line; optional leading "# m_max=K" comment.
inline LatticeGenVector parse_lattice_vector(std::istream& in) {
    LatticeGenVector gen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("m_max=");
            if (pos != std::string::npos) gen.m_max = std::stoi(line.substr(pos + 6));
            continue;
        }
        std::istringstream ls(line);
        std::uint64_t v;
        if (!(ls >> v)) throw parse_error("lattice vector: non-integer at line " + std::to_string(lineno));
        std::string rest;
        if (ls >> rest) throw parse_error("lattice vector: trailing junk at line " + std::to_string(lineno));
        gen.h.push_back(v);
    }
    if (gen.h.empty()) throw parse_error("lattice vector: empty file");
    return gen;
}

inline LatticeGenVector parse_lattice_vector(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open lattice vector file: " + path);
    return parse_lattice_vector(f);
}

namespace detail {

// base-2 radical inverse: i = sum i_l 2^l  ->  sum i_l 2^{-l-1}
inline double radical_inverse_base2(std::uint64_t i) {
    double r = 0.0, f = 0.5;
    for (; i; i >>= 1, f *= 0.5)
        if (i & 1) r += f;
    return r;
}

}  // namespace detail

inline PointBlock lattice_points(const LatticeGenVector& gen, std::size_t d,
                                 std::uint64_t n_start, std::uint64_t n_end,
                                 LatticeOrdering ordering = LatticeOrdering::natural,
                                 Randomization rand = {}) {
    if (d > gen.dimension())
        throw capacity_error("lattice: dimension " + std::to_string(d) + " exceeds generating vector length " +
                             std::to_string(gen.dimension()));
    const std::uint64_t cap = 1ULL << gen.m_max;
    if (n_end > cap)
        throw capacity_error("lattice: index range exceeds 2^m_max = " + std::to_string(cap));
    if (n_start > n_end) throw usage_error("lattice: n_start > n_end");
    if (rand.kind != RandKind::none && rand.kind != RandKind::shift_mod1)
        throw usage_error("lattice: randomization must be none or shift_mod1");
    if (ordering == LatticeOrdering::linear && n_end != 0 && (n_end & (n_end - 1)) != 0)
        throw usage_error("lattice: linear ordering requires n_end to be a power of 2");

    std::vector<double> shift(d, 0.0);
    if (rand.kind == RandKind::shift_mod1) {
        std::mt19937_64 eng(detail::mix_seed(rand.seed, 0x1a77));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (auto& s : shift) s = u01(eng);
    }

    PointBlock blk;
    blk.d = d;
    blk.family = Family::lattice;
    blk.ordering = ordering == LatticeOrdering::natural ? "natural" : "linear";
    blk.seed = rand.seed;
    blk.rand_kind = rand.kind;
    blk.n_start = n_start;
    blk.n_end = n_end;
    blk.values.resize((n_end - n_start) * d);
    blk.origin_warning = (rand.kind == RandKind::none && n_start == 0 && n_end > 0);

    for (std::uint64_t i = n_start; i < n_end; ++i) {
        double phi;
        if (ordering == LatticeOrdering::natural) {
            phi = detail::radical_inverse_base2(i);
        } else {
            phi = static_cast<double>(i) / static_cast<double>(n_end);
        }
        auto row = blk.row(i - n_start);
        for (std::size_t k = 0; k < d; ++k) {
            double v = phi * static_cast<double>(gen.h[k]) + shift[k];
            row[k] = v - std::floor(v);
            if (row[k] >= 1.0) row[k] = 0.0;  // guard against representation roundoff
        }
    }
    return blk;
}

}  // namespace qmc
