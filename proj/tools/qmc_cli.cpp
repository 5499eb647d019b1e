// qmc: command-line harness for low-discrepancy point generation, adaptive
// cubature, tolerance sweeps, and discrepancy diagnostics.
//
// Exit codes: 0 success/converged, 1 capacity error, 2 usage error,
// 3 tolerance not met within the sample budget.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qmc/cubature.hpp"
#include "qmc/quality.hpp"

using namespace qmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCapacity = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Family parse_family(const std::string& s) {
    if (s == "lattice") return Family::lattice;
    if (s == "net") return Family::digital_net;
    if (s == "halton") return Family::halton;
    if (s == "iid") return Family::iid;
    throw usage_error("unknown family: " + s);
}

RandKind parse_randomize(const std::string& s, Family fam) {
    if (s == "default") {
        switch (fam) {
            case Family::lattice: return RandKind::shift_mod1;
            case Family::digital_net: return RandKind::lms_with_digital_shift;
            case Family::halton: return RandKind::digit_shift;
            case Family::iid: return RandKind::none;
        }
    }
    if (s == "none") return RandKind::none;
    if (s == "shift") return RandKind::shift_mod1;
    if (s == "digital-shift") return RandKind::digital_shift;
    if (s == "lms") return RandKind::lms_with_digital_shift;
    if (s == "digit-shift") return RandKind::digit_shift;
    throw usage_error("unknown randomization: " + s);
}

struct PointFlags {
    std::string family = "lattice";
    std::size_t d = 2;
    std::uint64_t n_start = 0;
    std::uint64_t n_end = 8;
    std::string ordering;  // natural|linear (lattice), standard|gray (net)
    std::string randomize = "none";
    std::uint64_t seed = 7;
    std::string gen_file;

    void add_to(CLI::App* cmd, bool default_randomized) {
        if (default_randomized) randomize = "default";
        cmd->add_option("--family", family, "Point family: lattice|net|halton|iid")
            ->capture_default_str();
        cmd->add_option("--d", d, "Dimension")->capture_default_str();
        cmd->add_option("--n-start", n_start, "First point index")->capture_default_str();
        cmd->add_option("--n-end", n_end, "One past the last point index")->capture_default_str();
        cmd->add_option("--ordering", ordering,
                        "lattice: natural|linear; net: standard|gray (default natural/standard)");
        cmd->add_option("--randomize", randomize,
                        "none|default|shift|digital-shift|lms|digit-shift")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Randomization seed")->capture_default_str();
        cmd->add_option("--gen-file", gen_file,
                        "Generating vector / direction-number file (default: bundled)");
    }

    PointBlock generate() const {
        Family fam = parse_family(family);
        Randomization rand{parse_randomize(randomize, fam), seed};
        switch (fam) {
            case Family::lattice: {
                auto gen = gen_file.empty()
                               ? default_lattice_vector()
                               : std::make_shared<const LatticeGenVector>(parse_lattice_vector(gen_file));
                LatticeOrdering ord = LatticeOrdering::natural;
                if (ordering == "linear") ord = LatticeOrdering::linear;
                else if (!ordering.empty() && ordering != "natural")
                    throw usage_error("lattice ordering must be natural or linear");
                return lattice_points(*gen, d, n_start, n_end, ord, rand);
            }
            case Family::digital_net: {
                auto mats = gen_file.empty()
                                ? default_direction_numbers()
                                : std::make_shared<const GeneratingMatrices>(
                                      parse_direction_numbers(gen_file));
                NetOrdering ord = NetOrdering::standard;
                if (ordering == "gray") ord = NetOrdering::gray;
                else if (!ordering.empty() && ordering != "standard")
                    throw usage_error("net ordering must be standard or gray");
                return digital_net_points(*mats, d, n_start, n_end, ord, rand);
            }
            case Family::halton:
                if (!ordering.empty()) throw usage_error("halton takes no --ordering");
                return halton_points(d, n_start, n_end, rand);
            case Family::iid: {
                if (!ordering.empty()) throw usage_error("iid takes no --ordering");
                if (n_end < n_start) throw usage_error("n_end must be >= n_start");
                auto all = iid_points(d, n_end, seed);
                PointBlock blk = all;
                blk.values.assign(all.values.begin() + static_cast<std::ptrdiff_t>(n_start * d),
                                  all.values.end());
                blk.n_start = n_start;
                return blk;
            }
        }
        throw usage_error("unknown family");
    }
};

void write_csv(const PointBlock& blk, std::ostream& os) {
    for (std::size_t k = 0; k < blk.d; ++k) os << (k ? "," : "") << "x" << k;
    os << "\n";
    for (std::size_t i = 0; i < blk.n(); ++i) {
        for (std::size_t k = 0; k < blk.d; ++k) os << (k ? "," : "") << fmt17(blk.at(i, k));
        os << "\n";
    }
}

PointBlock read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open input file: " + path);
    PointBlock blk;
    std::string line;
    if (!std::getline(in, line)) throw usage_error("empty input file: " + path);
    blk.d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ls, cell, ',')) {
            try {
                blk.values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw parse_error("bad number at row " + std::to_string(row) + ": " + cell);
            }
            ++cols;
        }
        if (cols != blk.d)
            throw parse_error("row " + std::to_string(row) + " has " + std::to_string(cols) +
                              " columns, expected " + std::to_string(blk.d));
    }
    return blk;
}

std::unique_ptr<std::ofstream> open_output(const std::string& path, std::ostream*& os) {
    if (path.empty() || path == "-") {
        os = &std::cout;
        return nullptr;
    }
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw usage_error("cannot open output file: " + path);
    os = f.get();
    return f;
}

struct ProblemFlags {
    std::string problem = "keister";
    std::size_t d = 5;
    double S0 = 100.0, K = 100.0, r = 0.05, sigma = 0.2, tau = 1.0, drift = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--problem", problem, "keister|asian-call")->capture_default_str();
        cmd->add_option("--d", d, "Dimension / number of monitoring times")->capture_default_str();
        cmd->add_option("--S0", S0, "Asian call: initial price")->capture_default_str();
        cmd->add_option("--K", K, "Asian call: strike")->capture_default_str();
        cmd->add_option("--r", r, "Asian call: interest rate")->capture_default_str();
        cmd->add_option("--sigma", sigma, "Asian call: volatility")->capture_default_str();
        cmd->add_option("--tau", tau, "Asian call: time horizon")->capture_default_str();
        cmd->add_option("--drift", drift, "Asian call: importance-sampling drift")
            ->capture_default_str();
    }

    Problem make() const {
        if (problem == "keister") return keister_problem(d);
        if (problem == "asian-call") return asian_call_problem(S0, K, r, sigma, tau, d, drift);
        throw usage_error("unknown problem: " + problem);
    }

    std::optional<double> oracle(const Problem& p) const {
        if (p.known_value) return p.known_value;
        if (problem == "keister") return keister_true_value(d);
        return std::nullopt;
    }
};

CriterionKind parse_criterion(const std::string& s, Family fam) {
    if (s.empty()) {
        switch (fam) {
            case Family::iid: return CriterionKind::mc_clt;
            case Family::lattice: return CriterionKind::qmc_lattice_coeff_decay;
            case Family::digital_net: return CriterionKind::qmc_net_coeff_decay;
            case Family::halton: return CriterionKind::qmc_replications;
        }
    }
    if (s == "mc-clt") return CriterionKind::mc_clt;
    if (s == "qmc-rep") return CriterionKind::qmc_replications;
    if (s == "qmc-net") return CriterionKind::qmc_net_coeff_decay;
    if (s == "qmc-lattice") return CriterionKind::qmc_lattice_coeff_decay;
    throw usage_error("unknown criterion: " + s + " (mc-clt|qmc-rep|qmc-net|qmc-lattice)");
}

CubatureResult run_integration(const Problem& p, Family fam, std::uint64_t seed,
                               CriterionKind kind, ToleranceSpec tol) {
    SamplerSpec sampler = make_sampler(fam, p.d, seed);
    CriterionSpec crit;
    crit.kind = kind;
    return integrate(p, sampler, crit, tol);
}

// minimal hand-emitted log-log SVG line chart
void write_svg_loglog(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
    std::ofstream os(path);
    if (!os) throw usage_error("cannot open SVG output: " + path);
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [name, pts] : series)
        for (auto [x, y] : pts) {
            if (x <= 0 || y <= 0) continue;
            xmin = std::min(xmin, std::log10(x));
            xmax = std::max(xmax, std::log10(x));
            ymin = std::min(ymin, std::log10(y));
            ymax = std::max(ymax, std::log10(y));
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
       << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
       << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">log10 "
       << xlabel << "</text>\n";
    os << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << H / 2 << ")\">log10 " << ylabel << "</text>\n";
    for (int t = static_cast<int>(std::ceil(xmin)); t <= static_cast<int>(std::floor(xmax)); ++t)
        os << "<text x=\"" << px(t) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << t
           << "</text>\n";
    for (int t = static_cast<int>(std::ceil(ymin)); t <= static_cast<int>(std::floor(ymax)); ++t)
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << t
           << "</text>\n";
    int si = 0;
    for (const auto& [name, pts] : series) {
        const char* col = colors[si % 4];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : pts)
            if (x > 0 && y > 0) os << px(std::log10(x)) << "," << py(std::log10(y)) << " ";
        os << "\"/>\n";
        for (auto [x, y] : pts)
            if (x > 0 && y > 0)
                os << "<circle cx=\"" << px(std::log10(x)) << "\" cy=\"" << py(std::log10(y))
                   << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        os << "<text x=\"" << W - mr - 5 << "\" y=\"" << mt + 15 * si << "\" text-anchor=\"end\" fill=\""
           << col << "\">" << name << "</text>\n";
        ++si;
    }
    os << "</svg>\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-discrepancy point generation and adaptive cubature"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");

    // --- points -------------------------------------------------------------
    auto* points = app.add_subcommand("points", "Dump a range of points as CSV");
    PointFlags pf;
    pf.add_to(points, /*default_randomized=*/false);
    std::string points_out;
    points->add_option("-o,--output", points_out, "Output CSV path (default stdout)");

    // --- integrate ----------------------------------------------------------
    auto* integ = app.add_subcommand("integrate", "Adaptive cubature; prints a JSON result line");
    ProblemFlags prf;
    prf.add_to(integ);
    std::string int_family = "net", int_criterion;
    std::uint64_t int_seed = 7;
    double abs_tol = 1e-2, rel_tol = 0.0;
    bool with_time = false;
    integ->add_option("--family", int_family, "Sampler family: lattice|net|halton|iid")
        ->capture_default_str();
    integ->add_option("--criterion", int_criterion,
                      "mc-clt|qmc-rep|qmc-net|qmc-lattice (default: family's criterion)");
    integ->add_option("--seed", int_seed, "Randomization seed")->capture_default_str();
    integ->add_option("--abs-tol", abs_tol, "Absolute tolerance")->capture_default_str();
    integ->add_option("--rel-tol", rel_tol, "Relative tolerance")->capture_default_str();
    integ->add_flag("--with-time", with_time,
                    "Include wall time in the JSON (breaks byte determinism)");

    // --- compare ------------------------------------------------------------
    auto* comp = app.add_subcommand("compare", "Sweep tolerances across methods; emit CSV");
    ProblemFlags cpf;
    cpf.add_to(comp);
    std::vector<double> tolerances{1e-1, 1e-2};
    std::vector<std::string> methods{"mc-clt", "qmc-lattice"};
    std::uint64_t comp_seed = 7;
    std::string comp_out, comp_svg;
    comp->add_option("--tolerances", tolerances, "Absolute tolerances to sweep")
        ->capture_default_str();
    comp->add_option("--methods", methods, "Criteria to sweep (mc-clt|qmc-rep|qmc-net|qmc-lattice)")
        ->capture_default_str();
    comp->add_option("--seed", comp_seed, "Randomization seed")->capture_default_str();
    comp->add_option("-o,--output", comp_out, "Output CSV path (default stdout)");
    comp->add_option("--svg", comp_svg, "Optional SVG log-log chart (n and time vs tolerance)");

    // --- discrepancy --------------------------------------------------------
    auto* disc = app.add_subcommand("discrepancy", "Centered L2 discrepancy + stratification");
    PointFlags df;
    df.add_to(disc, /*default_randomized=*/true);
    std::string disc_input;
    bool compare_iid = false;
    int disc_seeds = 30;
    disc->add_option("--input", disc_input, "Load points from a CSV file instead of generating");
    disc->add_flag("--compare-iid", compare_iid,
                   "Compare the median LD discrepancy against IID over --seeds seeds");
    disc->add_option("--seeds", disc_seeds, "Seed count for --compare-iid medians")
        ->capture_default_str();

    try {
        app.parse(argc, argv);

        if (points->parsed()) {
            auto blk = pf.generate();
            if (blk.origin_warning)
                std::cerr << "warning: unrandomized sequence includes the origin; transforms to "
                             "unbounded domains will reject it\n";
            std::ostream* os = nullptr;
            auto file = open_output(points_out, os);
            write_csv(blk, *os);
            return kExitOk;
        }

        if (integ->parsed()) {
            auto p = prf.make();
            Family fam = parse_family(int_family);
            auto kind = parse_criterion(int_criterion, fam);
            auto res = run_integration(p, fam, int_seed, kind, {abs_tol, rel_tol});
            std::cout << res.to_json(with_time) << "\n";
            return res.termination == Termination::converged ? kExitOk : kExitBudget;
        }

        if (comp->parsed()) {
            auto p = cpf.make();
            auto oracle = cpf.oracle(p);
            std::ostream* os = nullptr;
            auto file = open_output(comp_out, os);
            *os << "tolerance,method,n,time_sec,estimate,abs_error_vs_oracle\n";
            std::map<std::string, std::vector<std::pair<double, double>>> n_series, t_series;
            for (double tol : tolerances) {
                for (const auto& meth : methods) {
                    auto kind = parse_criterion(meth, Family::iid);
                    Family fam = Family::iid;
                    if (kind == CriterionKind::qmc_lattice_coeff_decay) fam = Family::lattice;
                    if (kind == CriterionKind::qmc_net_coeff_decay) fam = Family::digital_net;
                    if (kind == CriterionKind::qmc_replications) fam = Family::lattice;
                    auto res = run_integration(p, fam, comp_seed, kind, {tol, 0.0});
                    *os << fmt17(tol) << "," << meth << "," << res.n_total << ","
                        << fmt17(res.elapsed_seconds) << "," << fmt17(res.estimate) << ",";
                    if (oracle) *os << fmt17(std::abs(res.estimate - *oracle));
                    *os << "\n";
                    n_series[meth].emplace_back(tol, static_cast<double>(res.n_total));
                    t_series[meth].emplace_back(tol, res.elapsed_seconds);
                }
            }
            if (!comp_svg.empty()) {
                std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
                for (auto& [name, pts] : n_series) series.emplace_back(name + " (n)", pts);
                for (auto& [name, pts] : t_series) series.emplace_back(name + " (sec)", pts);
                write_svg_loglog(comp_svg, "samples and run time vs tolerance: " + cpf.problem,
                                 "tolerance", "n / seconds", series);
            }
            return kExitOk;
        }

        if (disc->parsed()) {
            PointBlock blk = disc_input.empty() ? df.generate() : read_csv(disc_input);
            double cd = centered_l2_discrepancy(blk);
            std::string strat = "null";
            if (blk.n() > 1 && (blk.n() & (blk.n() - 1)) == 0) {
                int m = std::countr_zero(blk.n());
                strat = "[";
                bool first = true;
                for (bool ok : stratification_check(blk, m)) {
                    strat += (first ? "" : ",") + std::string(ok ? "true" : "false");
                    first = false;
                }
                strat += "]";
            }
            std::string verdict;
            if (compare_iid) {
                if (disc_input.empty() && parse_family(df.family) == Family::iid)
                    throw usage_error("--compare-iid needs an LD family");
                std::vector<double> ld_cd, iid_cd;
                for (int s = 0; s < disc_seeds; ++s) {
                    PointFlags g = df;
                    g.seed = df.seed + static_cast<std::uint64_t>(s);
                    if (g.randomize == "none") g.randomize = "default";
                    ld_cd.push_back(centered_l2_discrepancy(
                        disc_input.empty() ? g.generate() : blk));
                    iid_cd.push_back(centered_l2_discrepancy(iid_points(blk.d, blk.n(), g.seed)));
                }
                std::sort(ld_cd.begin(), ld_cd.end());
                std::sort(iid_cd.begin(), iid_cd.end());
                double ld_med = ld_cd[ld_cd.size() / 2], iid_med = iid_cd[iid_cd.size() / 2];
                verdict = ",\"median_cd_ld\":" + fmt17(ld_med) +
                          ",\"median_cd_iid\":" + fmt17(iid_med) +
                          ",\"ld_beats_iid\":" + (ld_med < iid_med ? "true" : "false");
            }
            std::cout << "{\"n\":" << blk.n() << ",\"d\":" << blk.d
                      << ",\"centered_l2_discrepancy\":" << fmt17(cd)
                      << ",\"stratified\":" << strat << verdict << "}\n";
            return kExitOk;
        }
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
