#pragma once
#include <optional>

#include <map>
#include <mutex>

#include "qmc/transforms.hpp"

namespace qmc {

// Pairs an original integrand g on T with a transform ladder, yielding the
// unit-cube integrand f(x) = g(Psi_hat_L(x)) * w(x).
struct Problem {
    std::string name;
    std::size_t d = 0;
    TransformLadder ladder;
    std::function<double(std::span<const double>)> g;
    // exact mean when known analytically (zero-volatility Asian paths)
    std::optional<double> known_value;
};

inline std::vector<double> evaluate_f(const Problem& p, const PointBlock& block) {
    auto [t, w] = ladder_transform(p.ladder, block);
    std::vector<double> f(t.n());
    for (std::size_t i = 0; i < t.n(); ++i) f[i] = p.g(t.row(i)) * w[i];
    return f;
}

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                               double fa, double fm, double fb, double eps, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = fn(lm), frm = fn(rm);
    double h = b - a;
    double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    double left = h / 12.0 * (fa + 4.0 * flm + fm);
    double right = h / 12.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) < 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(fn, a, m, fa, flm, fm, 0.5 * eps, depth - 1) +
           adaptive_simpson(fn, m, b, fm, frm, fb, 0.5 * eps, depth - 1);
}

inline double integrate_1d(const std::function<double(double)>& fn, double a, double b, double eps) {
    double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    return adaptive_simpson(fn, a, b, fa, fm, fb, eps, 48);
}

}  // namespace detail

// mu(d) = (2 pi^{d/2} / Gamma(d/2)) * int_0^inf cos(r) exp(-r^2) r^{d-1} dr,
// evaluated by adaptive quadrature to ~1e-13 and cached per dimension.
inline double keister_true_value(std::size_t d) {
    if (d < 1) throw usage_error("keister_true_value: d >= 1");
    static std::map<std::size_t, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const double dd = static_cast<double>(d);
    auto radial = [dd](double r) {
        return std::cos(r) * std::exp(-r * r) * std::pow(r, dd - 1.0);
    };
    double integral = detail::integrate_1d(radial, 0.0, 9.0, 1e-14);
    double mu = 2.0 * std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0) * integral;
    cache[d] = mu;
    return mu;
}

// mu = int cos(||t||) exp(-t^T t) dt over R^d, factored against the
// N(0, I/2) density; custom ladders perform importance sampling.
inline Problem keister_problem(std::size_t d, std::optional<TransformLadder> ladder = {}) {
    if (d < 1) throw usage_error("keister_problem: d >= 1");
    const auto di = static_cast<Eigen::Index>(d);
    Problem p;
    p.name = "keister";
    p.d = d;
    const double gscale = std::pow(std::numbers::pi, static_cast<double>(d) / 2.0);
    p.g = [gscale](std::span<const double> t) {
        double s = 0.0;
        for (double v : t) s += v * v;
        return gscale * std::cos(std::sqrt(s));
    };
    auto target = gaussian_transform(Eigen::VectorXd::Zero(di),
                                     0.5 * Eigen::MatrixXd::Identity(di, di), FactorMethod::cholesky);
    if (ladder) {
        p.ladder = std::move(*ladder);
        if (p.ladder.final_matches_last_step) {
            // custom sampler; the true measure stays N(0, I/2)
            p.ladder.final_matches_last_step = false;
            p.ladder.log_final_density = target.log_target_density;
        }
    } else {
        p.ladder = single_step_ladder(target, d);
    }
    return p;
}

// Arithmetic-mean Asian call under geometric Brownian motion, trapezoidal
// time average, discounted payoff.  A nonzero drift shifts the sampling
// measure while the target stays the driftless path law, so the density
// ratio implements importance sampling.
inline Problem asian_call_problem(double S0, double K, double r, double sigma, double tau,
                                  std::size_t d, double drift = 0.0) {
    if (!(S0 > 0.0) || !(K >= 0.0) || !(tau > 0.0) || sigma < 0.0 || d < 1)
        throw usage_error("asian_call_problem: invalid parameters");
    Problem p;
    p.name = "asian_call";
    p.d = d;
    const double dt = tau / static_cast<double>(d);
    const double disc = std::exp(-r * tau);
    p.g = [S0, K, r, sigma, dt, disc, d](std::span<const double> t) {
        double prev = S0, acc = 0.0;
        for (std::size_t j = 1; j <= d; ++j) {
            double Sj = S0 * std::exp((r - 0.5 * sigma * sigma) * dt * static_cast<double>(j) +
                                      sigma * t[j - 1]);
            acc += prev + Sj;
            prev = Sj;
        }
        double avg = acc / (2.0 * static_cast<double>(d));
        return disc * std::max(avg - K, 0.0);
    };
    auto sampling = brownian_motion(tau, d, drift, FactorMethod::pca);
    p.ladder = single_step_ladder(sampling, d);
    if (drift != 0.0) {
        auto target = brownian_motion(tau, d, 0.0, FactorMethod::pca);
        p.ladder.final_matches_last_step = false;
        p.ladder.log_final_density = target.log_target_density;
    }
    if (sigma == 0.0) {
        // deterministic path
        double prev = S0, acc = 0.0;
        for (std::size_t j = 1; j <= d; ++j) {
            double Sj = S0 * std::exp(r * dt * static_cast<double>(j));
            acc += prev + Sj;
            prev = Sj;
        }
        p.known_value = disc * std::max(acc / (2.0 * static_cast<double>(d)) - K, 0.0);
    }
    return p;
}

inline Problem custom_problem(std::function<double(std::span<const double>)> g,
                              TransformLadder ladder, std::string name = "custom") {
    Problem p;
    p.name = std::move(name);
    p.d = ladder.dimension;
    p.ladder = std::move(ladder);
    p.g = std::move(g);
    return p;
}

}  // namespace qmc
