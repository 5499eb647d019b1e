#pragma once

#include <algorithm>
#include "qmc/cubature.hpp"

namespace qmc {

// Centered L2 discrepancy, exact O(n^2 d) closed form.
inline double centered_l2_discrepancy(const PointBlock& block) {
    const std::size_t n = block.n(), d = block.d;
    if (n == 0) throw std::domain_error("centered_l2_discrepancy: empty block");
    double term1 = std::pow(13.0 / 12.0, static_cast<double>(d));
    double sum_i = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double prod = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            double a = std::abs(block.at(i, k) - 0.5);
            prod *= 1.0 + 0.5 * a - 0.5 * a * a;
        }
        sum_i += prod;
    }
    double sum_ij = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double prod = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                double ai = std::abs(block.at(i, k) - 0.5);
                double aj = std::abs(block.at(j, k) - 0.5);
                double aij = std::abs(block.at(i, k) - block.at(j, k));
                prod *= 1.0 + 0.5 * ai + 0.5 * aj - 0.5 * aij;
            }
            sum_ij += prod;
        }
    }
    const double nn = static_cast<double>(n);
    double cd2 = term1 - 2.0 / nn * sum_i + sum_ij / (nn * nn);
    return std::sqrt(std::max(cd2, 0.0));
}

// true iff each 1-D projection of the 2^m-point block has exactly one point
// per dyadic cell of width 2^-m
inline std::vector<bool> stratification_check(const PointBlock& block, int m) {
    const std::size_t n = block.n();
    if (n != (1ULL << m)) throw usage_error("stratification_check: block must hold exactly 2^m points");
    std::vector<bool> ok(block.d);
    std::vector<int> counts(n);
    for (std::size_t k = 0; k < block.d; ++k) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto cell = static_cast<std::size_t>(block.at(i, k) * static_cast<double>(n));
            if (cell >= n) cell = n - 1;
            ++counts[cell];
        }
        ok[k] = std::all_of(counts.begin(), counts.end(), [](int c) { return c == 1; });
    }
    return ok;
}

struct SlopeReport {
    std::vector<int> m_values;
    std::vector<double> rmse;  // per m, over the seed set
    double slope = 0.0;        // log2(rmse) vs m least squares
    double intercept = 0.0;
    bool degenerate = false;   // all RMSE at noise floor; fit not meaningful
};

// RMSE of the sample mean against the true value, per m over `seeds`
// independent randomizations, with a log2-log2 least-squares slope.
inline SlopeReport convergence_slope(const Problem& p, Family family, int m_lo, int m_hi,
                                     int seeds, double true_value, std::uint64_t base_seed = 1) {
    if (m_hi - m_lo + 1 < 3) throw usage_error("convergence_slope: need at least 3 m values");
    SlopeReport rep;
    for (int m = m_lo; m <= m_hi; ++m) {
        const std::uint64_t n = 1ULL << m;
        double mse = 0.0;
        for (int s = 0; s < seeds; ++s) {
            std::uint64_t seed = detail::mix_seed(base_seed, static_cast<std::uint64_t>(s) * 131 + m);
            double mean = 0.0;
            if (family == Family::iid) {
                for (double v : evaluate_f(p, iid_points(p.d, n, seed))) mean += v;
            } else {
                auto sampler = make_sampler(family, p.d, seed);
                for (double v : evaluate_f(p, sampler.generate(0, n))) mean += v;
            }
            mean /= static_cast<double>(n);
            mse += (mean - true_value) * (mean - true_value);
        }
        rep.m_values.push_back(m);
        rep.rmse.push_back(std::sqrt(mse / seeds));
    }
    double floor_rmse = 1e-14 * std::max(1.0, std::abs(true_value));
    rep.degenerate = std::all_of(rep.rmse.begin(), rep.rmse.end(),
                                 [&](double r) { return r < floor_rmse; });
    if (!rep.degenerate) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto cnt = static_cast<double>(rep.m_values.size());
        for (std::size_t i = 0; i < rep.m_values.size(); ++i) {
            double x = rep.m_values[i];
            double y = std::log2(std::max(rep.rmse[i], 1e-300));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        rep.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        rep.intercept = (sy - rep.slope * sx) / cnt;
    }
    return rep;
}

// unbiased sample mean and covariance
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> empirical_moments(const PointBlock& block) {
    const std::size_t n = block.n(), d = block.d;
    if (n < 2) throw std::domain_error("empirical_moments: need n >= 2");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) mean(static_cast<Eigen::Index>(k)) += block.at(i, k);
    mean /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::VectorXd c(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) c(static_cast<Eigen::Index>(k)) = block.at(i, k) - mean(static_cast<Eigen::Index>(k));
        cov += c * c.transpose();
    }
    cov /= static_cast<double>(n - 1);
    return {mean, cov};
}

}  // namespace qmc
