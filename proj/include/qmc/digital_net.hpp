#pragma once

#include <bit>
#include <fstream>
#include <random>
#include <sstream>

#include "qmc/common.hpp"

namespace qmc {

// Per-dimension generating-matrix columns of a base-2 digital net, stored as
// 32-bit words with the most significant bit holding the first output digit.
struct GeneratingMatrices {
    std::vector<std::vector<std::uint32_t>> columns;  // [dim][m_max]
    int m_max = 32;

    std::size_t dimension() const { return columns.size(); }
};

enum class NetOrdering { standard, gray };

// Joe-Kuo "new-joe-kuo-6" direction-number format: one header line, then rows
// "d s a m_1 ... m_s" with d monotone increasing from 2.  Dimension 1 is the
// van der Corput identity matrix.
inline GeneratingMatrices parse_direction_numbers(std::istream& in, std::size_t d_max = 0,
                                                  int m_max = 32) {
    if (m_max < 1 || m_max > 32) throw usage_error("direction numbers: m_max must be in [1,32]");
    GeneratingMatrices mats;
    mats.m_max = m_max;

    std::vector<std::uint32_t> vdc(m_max);
    for (int j = 0; j < m_max; ++j) vdc[j] = 1u << (31 - j);
    mats.columns.push_back(vdc);

    std::string line;
    if (!std::getline(in, line)) throw parse_error("direction numbers: empty file");
    std::uint64_t expect_d = 2;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::uint64_t dd, s, a;
        if (!(ls >> dd >> s >> a))
            throw parse_error("direction numbers: malformed row at line " + std::to_string(lineno));
        if (dd != expect_d)
            throw parse_error("direction numbers: non-monotone dimension at line " + std::to_string(lineno));
        ++expect_d;
        std::vector<std::uint64_t> m(s);
        for (auto& mi : m)
            if (!(ls >> mi))
                throw parse_error("direction numbers: missing m_i at line " + std::to_string(lineno));

        std::vector<std::uint32_t> col(m_max);
        for (int j = 0; j < m_max; ++j) {
            std::uint64_t v;
            if (j < static_cast<int>(s)) {
                v = m[j] << (31 - j);
            } else {
                // primitive polynomial recurrence on the direction numbers
                v = col[j - s] ^ (col[j - s] >> s);
                for (std::uint64_t t = 1; t < s; ++t)
                    if ((a >> (s - 1 - t)) & 1) v ^= col[j - t];
            }
            col[j] = static_cast<std::uint32_t>(v);
        }
        mats.columns.push_back(std::move(col));
        if (d_max != 0 && mats.columns.size() >= d_max) break;
    }
    for (std::size_t k = 0; k < mats.columns.size(); ++k) {
        if (!(mats.columns[k][0] & 0x80000000u))
            throw parse_error("direction numbers: first column of dimension " + std::to_string(k + 1) +
                              " lacks its top bit");
    }
    return mats;
}

inline GeneratingMatrices parse_direction_numbers(const std::string& path, std::size_t d_max = 0,
                                                  int m_max = 32) {
    std::ifstream f(path);
    if (!f) throw parse_error("cannot open direction-number file: " + path);
    return parse_direction_numbers(f, d_max, m_max);
}

namespace detail {

// Matousek linear scramble: left-multiply each generating matrix over GF(2)
// by a random unit-lower-triangular 32x32 matrix.  Digit q of a column lives
// at bit 32-q, so row r carries its unit diagonal at bit 32-r and random
// entries at the bits above it.
inline std::vector<std::uint32_t> lms_scramble_column_rows(std::mt19937_64& eng) {
    std::vector<std::uint32_t> rows(33);
    for (int r = 1; r <= 32; ++r) {
        std::uint32_t mask = 1u << (32 - r);
        if (r >= 2) {
            std::uint32_t high = ~0u << (33 - r);
            mask |= static_cast<std::uint32_t>(eng()) & high;
        }
        rows[r] = mask;
    }
    return rows;
}

inline std::uint32_t lms_apply(const std::vector<std::uint32_t>& rows, std::uint32_t col) {
    std::uint32_t out = 0;
    for (int r = 1; r <= 32; ++r)
        out |= static_cast<std::uint32_t>(std::popcount(rows[r] & col) & 1) << (32 - r);
    return out;
}

}  // namespace detail

inline PointBlock digital_net_points(const GeneratingMatrices& mats, std::size_t d,
                                     std::uint64_t n_start, std::uint64_t n_end,
                                     NetOrdering ordering = NetOrdering::standard,
                                     Randomization rand = {}) {
    if (d > mats.dimension())
        throw capacity_error("net: dimension " + std::to_string(d) + " exceeds generating matrices (" +
                             std::to_string(mats.dimension()) + ")");
    if (n_end > (1ULL << 32))
        throw capacity_error("net: more than 2^32 consecutive samples requested; the 32-bit sequence would repeat");
    if (n_end > (1ULL << mats.m_max))
        throw capacity_error("net: index range exceeds 2^m_max");
    if (n_start > n_end) throw usage_error("net: n_start > n_end");
    if (rand.kind != RandKind::none && rand.kind != RandKind::digital_shift &&
        rand.kind != RandKind::lms_with_digital_shift)
        throw usage_error("net: randomization must be none, digital_shift, or lms_with_digital_shift");

    // per-dimension scrambled columns and shift words
    std::vector<std::vector<std::uint32_t>> cols(d);
    std::vector<std::uint32_t> shift(d, 0);
    std::mt19937_64 eng(detail::mix_seed(rand.seed, 0xd161));
    for (std::size_t k = 0; k < d; ++k) {
        cols[k] = mats.columns[k];
        if (rand.kind == RandKind::lms_with_digital_shift) {
            auto rows = detail::lms_scramble_column_rows(eng);
            for (auto& c : cols[k]) c = detail::lms_apply(rows, c);
        }
    }
    if (rand.kind != RandKind::none)
        for (std::size_t k = 0; k < d; ++k) shift[k] = static_cast<std::uint32_t>(eng());

    PointBlock blk;
    blk.d = d;
    blk.family = Family::digital_net;
    blk.ordering = ordering == NetOrdering::standard ? "standard" : "gray";
    blk.seed = rand.seed;
    blk.rand_kind = rand.kind;
    blk.n_start = n_start;
    blk.n_end = n_end;
    blk.values.resize((n_end - n_start) * d);
    blk.origin_warning = (rand.kind == RandKind::none && n_start == 0 && n_end > 0);

    constexpr double norm = 1.0 / 4294967296.0;  // 2^-32
    for (std::uint64_t i = n_start; i < n_end; ++i) {
        std::uint64_t idx = ordering == NetOrdering::gray ? (i ^ (i >> 1)) : i;
        auto row = blk.row(i - n_start);
        for (std::size_t k = 0; k < d; ++k) {
            std::uint32_t w = 0;
            const auto& ck = cols[k];
            for (std::uint64_t b = idx; b;) {
                int j = std::countr_zero(b);
                w ^= ck[j];
                b &= b - 1;
            }
            row[k] = static_cast<double>(w ^ shift[k]) * norm;
        }
    }
    return blk;
}

}  // namespace qmc
