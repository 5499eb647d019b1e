#pragma once

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <complex>
#include <cstdlib>
#include <memory>

#include "qmc/digital_net.hpp"
#include "qmc/halton.hpp"
#include "qmc/iid.hpp"
#include "qmc/integrands.hpp"
#include "qmc/lattice.hpp"

namespace qmc {

struct ToleranceSpec {
    double abs_tol = 1e-2;
    double rel_tol = 0.0;

    double threshold(double estimate) const {
        if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
            throw usage_error("tolerance: at least one of abs_tol, rel_tol must be positive");
        return std::max(abs_tol, rel_tol * std::abs(estimate));
    }
};

enum class Termination { converged, budget_exhausted };

struct CubatureResult {
    double estimate = 0.0;
    std::uint64_t n_total = 0;
    double error_bound = 0.0;
    double elapsed_seconds = 0.0;
    int iterations = 0;
    Termination termination = Termination::converged;
    std::string criterion;
    bool cone_suspect = false;

    // with_time=false gives byte-stable output for determinism checks
    std::string to_json(bool with_time = true) const;
};

// Generating data plus options; immutable description of an LD point stream.
struct SamplerSpec {
    Family family = Family::digital_net;
    std::size_t d = 1;
    std::uint64_t seed = 7;
    RandKind rand_kind = RandKind::none;  // none => family default randomization
    std::shared_ptr<const LatticeGenVector> lattice;
    std::shared_ptr<const GeneratingMatrices> net;
    LatticeOrdering lattice_ordering = LatticeOrdering::natural;
    NetOrdering net_ordering = NetOrdering::standard;

    RandKind effective_rand() const {
        if (rand_kind != RandKind::none) return rand_kind;
        switch (family) {
            case Family::lattice: return RandKind::shift_mod1;
            case Family::digital_net: return RandKind::lms_with_digital_shift;
            case Family::halton: return RandKind::digit_shift;
            case Family::iid: return RandKind::none;
        }
        return RandKind::none;
    }

    PointBlock generate(std::uint64_t n_start, std::uint64_t n_end,
                        std::uint64_t seed_override) const {
        Randomization rand{effective_rand(), seed_override};
        switch (family) {
            case Family::lattice:
                if (!lattice) throw usage_error("sampler: lattice generating vector not set");
                return lattice_points(*lattice, d, n_start, n_end, lattice_ordering, rand);
            case Family::digital_net:
                if (!net) throw usage_error("sampler: generating matrices not set");
                return digital_net_points(*net, d, n_start, n_end, net_ordering, rand);
            case Family::halton:
                return halton_points(d, n_start, n_end, rand);
            case Family::iid:
                throw usage_error("sampler: IID streams are stateful; use IidGenerator");
        }
        throw usage_error("sampler: unknown family");
    }

    PointBlock generate(std::uint64_t n_start, std::uint64_t n_end) const {
        return generate(n_start, n_end, seed);
    }
};

// --- bundled generating data ---------------------------------------------

inline std::string data_dir() {
    if (const char* env = std::getenv("QMC_DATA_DIR")) return env;
#ifdef QMC_DEFAULT_DATA_DIR
    return QMC_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

inline std::shared_ptr<const LatticeGenVector> default_lattice_vector() {
    static auto gen = std::make_shared<const LatticeGenVector>(
        parse_lattice_vector(data_dir() + "/lattice-cbc-104-2to20.txt"));
    return gen;
}

inline std::shared_ptr<const GeneratingMatrices> default_direction_numbers() {
    static auto mats = std::make_shared<const GeneratingMatrices>(
        parse_direction_numbers(data_dir() + "/joe-kuo-6.3667.txt"));
    return mats;
}

inline SamplerSpec make_sampler(Family family, std::size_t d, std::uint64_t seed) {
    SamplerSpec s;
    s.family = family;
    s.d = d;
    s.seed = seed;
    if (family == Family::lattice) s.lattice = default_lattice_vector();
    if (family == Family::digital_net) s.net = default_direction_numbers();
    return s;
}

// --- transforms ------------------------------------------------------------

namespace detail {

// in-place unnormalized fast Walsh-Hadamard transform, n a power of 2
inline void fwht(std::span<double> a) {
    const std::size_t n = a.size();
    for (std::size_t len = 1; len < n; len <<= 1)
        for (std::size_t i = 0; i < n; i += len << 1)
            for (std::size_t j = i; j < i + len; ++j) {
                double u = a[j], v = a[j + len];
                a[j] = u + v;
                a[j + len] = u - v;
            }
}

// in-place unnormalized radix-2 FFT, n a power of 2
inline void fft(std::span<std::complex<double>> a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                auto u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::vector<double> eval_block(const Problem& p, const PointBlock& blk) {
    return evaluate_f(p, blk);
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

}  // namespace detail

// --- stopping criteria -----------------------------------------------------

// R independently randomized streams; error bound from the t-quantile of the
// spread of replicate means; doubles n until the bound meets the tolerance.
inline CubatureResult cub_qmc_replications(const Problem& p, const SamplerSpec& sampler,
                                           ToleranceSpec tol, int R = 16, int m_min = 8,
                                           int m_max = 24) {
    if (R < 4) throw usage_error("replications: R >= 4 required");
    if (sampler.family == Family::iid)
        throw usage_error("replications: requires an LD sampler (lattice, net, or halton)");
    if (sampler.effective_rand() == RandKind::none)
        throw usage_error("replications: sampler must be randomized");
    detail::Stopwatch sw;
    boost::math::students_t_distribution<double> tdist(R - 1);
    const double tq = boost::math::quantile(tdist, 0.995);

    std::vector<double> sums(R, 0.0);
    CubatureResult res;
    res.criterion = "qmc_replications";
    std::uint64_t n = 0;
    for (int m = m_min; m <= m_max; ++m) {
        const std::uint64_t n_new = 1ULL << m;
        for (int r = 0; r < R; ++r) {
            auto blk = sampler.generate(n, n_new, detail::mix_seed(sampler.seed, 1000 + r));
            for (double v : detail::eval_block(p, blk)) sums[r] += v;
        }
        n = n_new;
        ++res.iterations;
        double mean = 0.0;
        for (int r = 0; r < R; ++r) mean += sums[r] / static_cast<double>(n);
        mean /= R;
        double var = 0.0;
        for (int r = 0; r < R; ++r) {
            double dmean = sums[r] / static_cast<double>(n) - mean;
            var += dmean * dmean;
        }
        var /= (R - 1);
        res.estimate = mean;
        res.error_bound = tq * std::sqrt(var / R);
        res.n_total = n;
        if (res.error_bound <= tol.threshold(mean)) {
            res.termination = Termination::converged;
            res.elapsed_seconds = sw.seconds();
            return res;
        }
    }
    res.termination = Termination::budget_exhausted;
    res.elapsed_seconds = sw.seconds();
    return res;
}

namespace detail {

// Shared doubling driver for the coefficient-decay criteria: `transform_mags`
// must fill `mags[f]` with the normalized coefficient magnitudes |y_f| of the
// n sampled values and return coefficient 0, i.e. the sample mean.
//
// An adaptively reordered wavenumber map keeps the larger coefficients in the
// front half of every dyadic block, so the block at lag lstar below the top
// tracks the resolved coefficient decay; the error bound extrapolates that
// block sum to the unsampled tail.
template <typename TransformFn>
CubatureResult coeff_decay_driver(const Problem& p, const SamplerSpec& sampler, ToleranceSpec tol,
                                  int m_min, int m_max, double inflate, int lstar,
                                  const char* name, TransformFn transform_mags) {
    if (lstar < 1 || m_min <= lstar)
        throw usage_error("coefficient-decay criterion: need 1 <= lstar < m_min");
    if (m_max < m_min) throw usage_error("coefficient-decay criterion: m_max >= m_min");
    detail::Stopwatch sw;
    CubatureResult res;
    res.criterion = name;
    std::vector<double> values, mags;
    std::vector<std::size_t> kappa;
    values.reserve(1ULL << m_min);
    std::uint64_t n = 0;
    double stilde_prev = std::numeric_limits<double>::infinity();
    for (int m = m_min; m <= m_max; ++m) {
        const std::uint64_t n_new = 1ULL << m;
        auto blk = sampler.generate(n, n_new);
        for (double v : detail::eval_block(p, blk)) values.push_back(v);
        n = n_new;
        ++res.iterations;

        mags.assign(n, 0.0);
        res.estimate = transform_mags(values, mags);
        res.n_total = n;

        int l_low;
        if (m == m_min) {
            kappa.resize(n);
            for (std::size_t i = 0; i < n; ++i) kappa[i] = i;
            l_low = 1;
        } else {
            kappa.resize(n);
            for (std::size_t i = n / 2; i < n; ++i) kappa[i] = kappa[i - n / 2] + n / 2;
            l_low = m - lstar;
        }
        for (int l = m - 1; l >= l_low; --l) {
            const std::size_t nl = 1ULL << l;
            for (std::size_t j = 1; j < nl; ++j) {
                if (mags[kappa[nl + j]] > mags[kappa[j]])
                    for (std::size_t c = 0; c < n; c += 2 * nl)
                        std::swap(kappa[j + c], kappa[nl + j + c]);
            }
        }

        const std::size_t lag_lo = 1ULL << (m - lstar);
        double stilde = 0.0;
        for (std::size_t f = lag_lo; f < 2 * lag_lo; ++f) stilde += mags[kappa[f]];
        res.error_bound = inflate * std::ldexp(stilde, -m);
        // the block width doubles with m, so a benign profile may grow slowly;
        // suspect the decay assumption only when the bound itself stops falling
        if (stilde > 2.0 * stilde_prev) res.cone_suspect = true;
        stilde_prev = stilde;

        if (res.error_bound <= tol.threshold(res.estimate)) {
            res.termination = Termination::converged;
            res.elapsed_seconds = sw.seconds();
            return res;
        }
    }
    res.termination = Termination::budget_exhausted;
    res.elapsed_seconds = sw.seconds();
    return res;
}

}  // namespace detail

// Doubles n and bounds the error by the decay of the Walsh coefficients of
// the sampled integrand (digitally shifted digital net, standard order).
inline CubatureResult cub_qmc_net_coeff_decay(const Problem& p, const SamplerSpec& sampler,
                                              ToleranceSpec tol, int m_min = 10, int m_max = 24,
                                              double inflate = 2.0, int lstar = 4) {
    if (sampler.family != Family::digital_net)
        throw usage_error("net coefficient-decay criterion requires a digital-net sampler");
    if (sampler.net_ordering != NetOrdering::standard)
        throw usage_error("net coefficient-decay criterion requires standard ordering");
    auto rk = sampler.effective_rand();
    if (rk != RandKind::digital_shift && rk != RandKind::lms_with_digital_shift)
        throw usage_error("net coefficient-decay criterion requires a digitally shifted net");
    return detail::coeff_decay_driver(
        p, sampler, tol, m_min, m_max, inflate, lstar, "qmc_net_coeff_decay",
        [](const std::vector<double>& values, std::vector<double>& mags) {
            std::vector<double> c(values);
            detail::fwht(c);
            const double inv_n = 1.0 / static_cast<double>(c.size());
            for (std::size_t f = 0; f < c.size(); ++f) mags[f] = std::abs(c[f]) * inv_n;
            return c[0] * inv_n;
        });
}

// Same structure with the discrete Fourier transform over natural-ordered
// shifted lattice points.
inline CubatureResult cub_qmc_lattice_coeff_decay(const Problem& p, const SamplerSpec& sampler,
                                                  ToleranceSpec tol, int m_min = 10, int m_max = 24,
                                                  double inflate = 2.0, int lstar = 4) {
    if (sampler.family != Family::lattice)
        throw usage_error("lattice coefficient-decay criterion requires a lattice sampler");
    if (sampler.lattice_ordering != LatticeOrdering::natural)
        throw usage_error("lattice coefficient-decay criterion requires natural ordering");
    if (sampler.effective_rand() != RandKind::shift_mod1)
        throw usage_error("lattice coefficient-decay criterion requires a shifted lattice");
    return detail::coeff_decay_driver(
        p, sampler, tol, m_min, m_max, inflate, lstar, "qmc_lattice_coeff_decay",
        [](const std::vector<double>& values, std::vector<double>& mags) {
            // natural generation order is the bit-reversal of the linear
            // lattice order the DFT frequency map assumes; un-reverse first
            const std::size_t n = values.size();
            const int m = std::countr_zero(n);
            std::vector<std::complex<double>> c(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = 0;
                for (int b = 0; b < m; ++b) j |= ((i >> b) & 1ULL) << (m - 1 - b);
                c[j] = values[i];
            }
            detail::fft(c);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t f = 0; f < n; ++f) mags[f] = std::abs(c[f]) * inv_n;
            return c[0].real() * inv_n;
        });
}

// Two-stage IID procedure: pilot variance estimate, then the CLT sample size
// for the requested tolerance.
inline CubatureResult cub_mc_clt(const Problem& p, std::size_t d, std::uint64_t seed,
                                 ToleranceSpec tol, std::uint64_t n_pilot = 1024,
                                 double inflate = 1.2, double z = 2.58) {
    if (n_pilot < 64) throw usage_error("clt: n_pilot >= 64 required");
    if (d != p.d) throw usage_error("clt: sampler dimension does not match problem");
    detail::Stopwatch sw;
    CubatureResult res;
    res.criterion = "mc_clt";
    IidGenerator gen(d, seed);
    auto pilot = detail::eval_block(p, gen.next(n_pilot));
    double mean1 = 0.0;
    for (double v : pilot) mean1 += v;
    mean1 /= static_cast<double>(n_pilot);
    double var = 0.0;
    for (double v : pilot) var += (v - mean1) * (v - mean1);
    var /= static_cast<double>(n_pilot - 1);
    const double sigma_hat = std::sqrt(var);
    const double eps = tol.threshold(mean1);
    res.iterations = 1;
    if (sigma_hat == 0.0) {
        res.estimate = mean1;
        res.n_total = n_pilot;
        res.error_bound = 0.0;
        res.elapsed_seconds = sw.seconds();
        return res;
    }
    auto n2 = static_cast<std::uint64_t>(std::ceil(std::pow(z * inflate * sigma_hat / eps, 2.0)));
    n2 = std::max<std::uint64_t>(n2, 64);
    double sum = 0.0;
    const std::uint64_t chunk = 1 << 16;
    for (std::uint64_t done = 0; done < n2;) {
        std::uint64_t take = std::min(chunk, n2 - done);
        for (double v : detail::eval_block(p, gen.next(take))) sum += v;
        done += take;
    }
    res.estimate = sum / static_cast<double>(n2);
    res.n_total = n_pilot + n2;
    res.error_bound = eps;
    res.iterations = 2;
    res.elapsed_seconds = sw.seconds();
    return res;
}

// --- dispatch --------------------------------------------------------------

enum class CriterionKind { mc_clt, qmc_replications, qmc_net_coeff_decay, qmc_lattice_coeff_decay };

struct CriterionSpec {
    CriterionKind kind = CriterionKind::qmc_net_coeff_decay;
    int replications = 16;
    int rep_m_min = 8;
    int m_min = 10;
    int m_max = 24;
    double inflate = 2.0;
    int lstar = 4;
    std::uint64_t n_pilot = 1024;
    double clt_inflate = 1.2;
    double z = 2.58;
};

inline CubatureResult integrate(const Problem& p, const SamplerSpec& sampler,
                                const CriterionSpec& crit, ToleranceSpec tol) {
    if (sampler.d != p.d) throw usage_error("integrate: sampler dimension does not match problem");
    switch (crit.kind) {
        case CriterionKind::mc_clt:
            if (sampler.family != Family::iid)
                throw usage_error("integrate: CLT criterion requires an IID sampler");
            return cub_mc_clt(p, sampler.d, sampler.seed, tol, crit.n_pilot, crit.clt_inflate, crit.z);
        case CriterionKind::qmc_replications:
            return cub_qmc_replications(p, sampler, tol, crit.replications, crit.rep_m_min,
                                        crit.m_max);
        case CriterionKind::qmc_net_coeff_decay:
            return cub_qmc_net_coeff_decay(p, sampler, tol, crit.m_min, crit.m_max, crit.inflate,
                                           crit.lstar);
        case CriterionKind::qmc_lattice_coeff_decay:
            return cub_qmc_lattice_coeff_decay(p, sampler, tol, crit.m_min, crit.m_max, crit.inflate,
                                               crit.lstar);
    }
    throw usage_error("integrate: unknown criterion");
}

inline std::string CubatureResult::to_json(bool with_time) const {
    char time_part[64] = "";
    if (with_time) std::snprintf(time_part, sizeof(time_part), "\"time_sec\":%.6g,", elapsed_seconds);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"estimate\":%.17g,\"n\":%llu,\"error_bound\":%.17g,%s"
                  "\"criterion\":\"%s\",\"flags\":{\"converged\":%s,\"cone_suspect\":%s},"
                  "\"iterations\":%d}",
                  estimate, static_cast<unsigned long long>(n_total), error_bound, time_part,
                  criterion.c_str(), termination == Termination::converged ? "true" : "false",
                  cone_suspect ? "true" : "false", iterations);
    return buf;
}

}  // namespace qmc
