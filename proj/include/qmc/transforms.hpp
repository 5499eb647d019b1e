#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <numbers>

#include "qmc/common.hpp"

namespace qmc {

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

// Acklam's rational approximation followed by one Halley step against the
// erfc-based CDF; relative error is at machine-precision level, well inside
// the 1e-9 contract.
inline double inverse_normal_cdf(double u) {
    if (u <= 0.0 || u >= 1.0)
        throw boundary_error("inverse_normal_cdf: argument must lie strictly inside (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (u < plow) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (u <= phigh) {
        double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - u;
    double v = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - v / (1.0 + 0.5 * x * v);
}

enum class FactorMethod { pca, cholesky };

// mean a and factor A with Sigma = A A^T
struct CovarianceFactor {
    Eigen::VectorXd mean;
    Eigen::MatrixXd factor;
    FactorMethod method = FactorMethod::pca;
};

inline Eigen::MatrixXd factor_covariance(const Eigen::MatrixXd& sigma, FactorMethod method) {
    if (sigma.rows() != sigma.cols()) throw usage_error("covariance must be square");
    if (!sigma.isApprox(sigma.transpose(), 1e-10)) throw usage_error("covariance must be symmetric");
    const auto d = sigma.rows();
    if (method == FactorMethod::cholesky) {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("cholesky factorization failed: covariance not positive definite");
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::MatrixXd U = es.eigenvectors();
    if (ev.minCoeff() < -1e-10 * std::max(1.0, ev.maxCoeff()))
        throw std::runtime_error("pca factorization failed: covariance not positive semi-definite");
    // descending eigenvalues; sign fixed so the largest-magnitude entry of
    // each eigenvector is positive
    Eigen::MatrixXd A(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index src = d - 1 - j;
        Eigen::VectorXd col = U.col(src);
        Eigen::Index imax;
        col.cwiseAbs().maxCoeff(&imax);
        if (col(imax) < 0) col = -col;
        A.col(j) = col * std::sqrt(std::max(ev(src), 0.0));
    }
    return A;
}

// One variable-transform step Psi_l with its target density lambda_l and
// mimicked-input density rho_l (log scale; rho_l is identically 1 for
// inverse-CDF steps, so log_mimic_density stays empty).
struct TransformStep {
    std::string domain = "unit_cube";
    std::string codomain;
    std::function<void(std::span<const double>, std::span<double>)> forward;
    std::function<double(std::span<const double>)> log_target_density;
    std::function<double(std::span<const double>)> log_mimic_density;  // empty => log 1
    std::string name;
};

// Ordered composition Psi_L o ... o Psi_1 with density-ratio bookkeeping.
// If final_matches_last_step, the overall target lambda is the last step's
// lambda_l and the two cancel structurally, so matching single-step ladders
// yield weights that are exactly 1.
struct TransformLadder {
    std::vector<TransformStep> steps;
    std::function<double(std::span<const double>)> log_final_density;  // lambda; empty with final_matches_last_step
    std::function<double(std::span<const double>)> log_base_density;   // rho; empty => log 1 (unit cube)
    bool final_matches_last_step = true;
    std::size_t dimension = 0;
    std::string codomain() const { return steps.empty() ? "unit_cube" : steps.back().codomain; }
};

inline TransformLadder identity_ladder(std::size_t d) {
    TransformLadder lad;
    lad.dimension = d;
    lad.final_matches_last_step = false;
    return lad;
}

inline TransformLadder single_step_ladder(TransformStep step, std::size_t d) {
    TransformLadder lad;
    lad.dimension = d;
    lad.steps.push_back(std::move(step));
    return lad;
}

// t_i = Psi_hat_L(x_i) and the per-point importance weight
//   w_i = [lambda(t_i)/rho(x_i)] * prod_l rho_l(Psi_hat_{l-1}(x_i)) / lambda_l(Psi_hat_l(x_i))
inline std::pair<PointBlock, std::vector<double>> ladder_transform(const TransformLadder& ladder,
                                                                   const PointBlock& block) {
    if (block.d != ladder.dimension && !ladder.steps.empty())
        throw usage_error("ladder_transform: block dimension " + std::to_string(block.d) +
                          " does not match ladder dimension " + std::to_string(ladder.dimension));
    const std::size_t n = block.n(), d = block.d;
    PointBlock out = block;
    out.domain = ladder.codomain();
    std::vector<double> weights(n, 1.0);

    std::vector<double> cur(d), nxt(d);
    const std::size_t L = ladder.steps.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto src = block.row(i);
        std::copy(src.begin(), src.end(), cur.begin());
        double logw = 0.0;
        if (ladder.log_base_density) logw -= ladder.log_base_density(cur);
        for (std::size_t l = 0; l < L; ++l) {
            const auto& step = ladder.steps[l];
            if (step.log_mimic_density) logw += step.log_mimic_density(cur);
            try {
                step.forward(cur, nxt);
            } catch (const boundary_error& e) {
                throw boundary_error(std::string(e.what()) + " (step " + step.name + ", point index " +
                                     std::to_string(i + block.n_start) + ")");
            }
            std::swap(cur, nxt);
            const bool last = (l + 1 == L);
            if (!(last && ladder.final_matches_last_step)) {
                if (!step.log_target_density)
                    throw usage_error("ladder_transform: step " + step.name + " lacks a target density");
                double ld = step.log_target_density(cur);
                if (!std::isfinite(ld) && ld < 0)
                    throw std::runtime_error("ladder_transform: zero density at step " + step.name +
                                             ", point index " + std::to_string(i + block.n_start));
                logw -= ld;
            }
        }
        if (!ladder.final_matches_last_step) {
            if (ladder.log_final_density) logw += ladder.log_final_density(cur);
        } else if (!L) {
            logw = 0.0;
        }
        weights[i] = std::exp(logw);
        std::copy(cur.begin(), cur.end(), out.row(i).begin());
    }
    return {std::move(out), std::move(weights)};
}

inline TransformStep uniform_transform(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw usage_error("uniform_transform: dimension mismatch");
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (!(a(k) < b(k)) || !std::isfinite(a(k)) || !std::isfinite(b(k)))
            throw usage_error("uniform_transform: requires finite a < b componentwise");
    }
    double log_vol = (b - a).array().log().sum();
    TransformStep step;
    step.codomain = "box";
    step.name = "uniform";
    step.forward = [a, b](std::span<const double> x, std::span<double> t) {
        for (std::size_t k = 0; k < x.size(); ++k)
            t[k] = a(static_cast<Eigen::Index>(k)) +
                   (b(static_cast<Eigen::Index>(k)) - a(static_cast<Eigen::Index>(k))) * x[k];
    };
    step.log_target_density = [log_vol](std::span<const double>) { return -log_vol; };
    return step;
}

namespace detail {

struct GaussianStepState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd factor;
    Eigen::LLT<Eigen::MatrixXd> llt;  // of Sigma, for density evaluation
    double log_norm = 0.0;            // -(d/2)log(2pi) - (1/2)log det Sigma
    bool density_ok = false;
};

}  // namespace detail

inline TransformStep gaussian_transform(const Eigen::VectorXd& a, const Eigen::MatrixXd& sigma,
                                        FactorMethod method = FactorMethod::pca) {
    if (a.size() != sigma.rows()) throw usage_error("gaussian_transform: dimension mismatch");
    auto st = std::make_shared<detail::GaussianStepState>();
    st->mean = a;
    st->factor = factor_covariance(sigma, method);
    st->llt.compute(sigma);
    if (st->llt.info() == Eigen::Success) {
        double logdet = 2.0 * st->llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        st->log_norm = -0.5 * (static_cast<double>(a.size()) * std::log(2.0 * std::numbers::pi) + logdet);
        st->density_ok = true;
    }
    TransformStep step;
    step.codomain = "real_line";
    step.name = "gaussian";
    step.forward = [st](std::span<const double> x, std::span<double> t) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
        for (std::size_t k = 0; k < x.size(); ++k)
            z(static_cast<Eigen::Index>(k)) = inverse_normal_cdf(x[k]);
        Eigen::VectorXd out = st->mean + st->factor * z;
        for (std::size_t k = 0; k < x.size(); ++k) t[k] = out(static_cast<Eigen::Index>(k));
    };
    step.log_target_density = [st](std::span<const double> t) {
        if (!st->density_ok)
            throw std::runtime_error("gaussian density unavailable for rank-deficient covariance");
        Eigen::Map<const Eigen::VectorXd> tv(t.data(), static_cast<Eigen::Index>(t.size()));
        Eigen::VectorXd c = tv - st->mean;
        return st->log_norm - 0.5 * c.dot(st->llt.solve(c));
    };
    return step;
}

// Brownian motion at times (tau/d)(1..d): Gaussian with
// Sigma_{jk} = (tau/d) min(j,k), mean = drift * (tau/d)(1..d).
inline TransformStep brownian_motion(double tau, std::size_t d, double drift,
                                     FactorMethod method = FactorMethod::pca) {
    if (!(tau > 0.0) || d < 1) throw usage_error("brownian_motion: requires tau > 0, d >= 1");
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd sigma(di, di);
    Eigen::VectorXd a(di);
    const double dt = tau / static_cast<double>(d);
    for (Eigen::Index j = 0; j < di; ++j) {
        a(j) = drift * dt * static_cast<double>(j + 1);
        for (Eigen::Index k = 0; k < di; ++k) sigma(j, k) = dt * static_cast<double>(std::min(j, k) + 1);
    }
    auto step = gaussian_transform(a, sigma, method);
    step.name = "brownian_motion";
    return step;
}

inline Eigen::MatrixXd brownian_covariance(double tau, std::size_t d) {
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd sigma(di, di);
    const double dt = tau / static_cast<double>(d);
    for (Eigen::Index j = 0; j < di; ++j)
        for (Eigen::Index k = 0; k < di; ++k) sigma(j, k) = dt * static_cast<double>(std::min(j, k) + 1);
    return sigma;
}

// Componentwise Kumaraswamy inverse CDF F^{-1}(u) = (1-(1-u)^{1/beta})^{1/alpha}
inline TransformStep kumaraswamy_transform(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
    if (alpha.size() != beta.size()) throw usage_error("kumaraswamy_transform: dimension mismatch");
    if (alpha.minCoeff() <= 0.0 || beta.minCoeff() <= 0.0)
        throw usage_error("kumaraswamy_transform: shape parameters must be positive");
    TransformStep step;
    step.codomain = "unit_cube";
    step.name = "kumaraswamy";
    step.forward = [alpha, beta](std::span<const double> x, std::span<double> t) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            auto ki = static_cast<Eigen::Index>(k);
            t[k] = std::pow(1.0 - std::pow(1.0 - x[k], 1.0 / beta(ki)), 1.0 / alpha(ki));
        }
    };
    step.log_target_density = [alpha, beta](std::span<const double> t) {
        double lp = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            auto ki = static_cast<Eigen::Index>(k);
            const double al = alpha(ki), be = beta(ki), tk = t[k];
            lp += std::log(al) + std::log(be) + (al - 1.0) * std::log(tk) +
                  (be - 1.0) * std::log1p(-std::pow(tk, al));
        }
        return lp;
    };
    return step;
}

// Identity-factor Gaussian map used purely to fill R^d under Lebesgue weight;
// the surrounding ladder sets lambda == 1 so the weight carries the Jacobian.
inline TransformStep lebesgue_tail_transform(std::size_t d) {
    auto step = gaussian_transform(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
                                   Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                             static_cast<Eigen::Index>(d)),
                                   FactorMethod::cholesky);
    step.name = "lebesgue_tail";
    return step;
}

inline TransformLadder lebesgue_ladder(std::size_t d) {
    TransformLadder lad;
    lad.dimension = d;
    lad.steps.push_back(lebesgue_tail_transform(d));
    lad.final_matches_last_step = false;
    lad.log_final_density = [](std::span<const double>) { return 0.0; };  // Lebesgue
    return lad;
}

}  // namespace qmc
