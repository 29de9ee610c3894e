// Acceptance run: one PASS/FAIL line per criterion, details for every miss.

#include "property_suite.hpp"

#include "cli.hpp"
#include "sme/aggregation.hpp"
#include "sme/mc_oracle.hpp"
#include "sme/model_io.hpp"
#include "sme/stop_loss.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace sme;

namespace {

using Clock = std::chrono::steady_clock;
using Table = std::vector<std::vector<std::string>>;

std::string model(const char* name) { return std::string(SME_MODELS_DIR) + "/" + name; }

// Runs the command line and returns the CSV body (header and '#' lines dropped).
Table cli_csv(std::vector<std::string> args) {
    std::ostringstream out, err;
    if (const int code = cli::run(args, out, err); code != 0) {
        throw std::runtime_error("command failed (" + std::to_string(code) + "): " + err.str());
    }
    Table t;
    std::istringstream in(out.str());
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        t.push_back(cells);
    }
    return t;
}

double num(const std::string& s) { return std::stod(s); }

struct Criterion {
    int id;
    std::string title;
    double limit_seconds;
    std::vector<std::string> misses;
    std::size_t checks = 0;

    Criterion(int i, std::string t, double limit) : id(i), title(std::move(t)), limit_seconds(limit) {}

    void expect(const std::string& what, double got, double want, double tol) {
        ++checks;
        if (!(std::abs(got - want) <= tol)) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s: got %.10g, expected %.10g (|diff| %.3g > %.3g)", what.c_str(), got, want,
                          std::abs(got - want), tol);
            misses.emplace_back(buf);
        }
    }
    void require(const std::string& what, bool ok) {
        ++checks;
        if (!ok) misses.push_back(what);
    }
};

bool report(Criterion& c, const std::function<void(Criterion&)>& body) {
    const auto t0 = Clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.misses.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > c.limit_seconds) {
        c.misses.push_back("runtime " + std::to_string(secs) + " s over the " + std::to_string(c.limit_seconds) +
                           " s limit");
    }
    const bool pass = c.misses.empty();
    std::printf("%s criterion %d: %s (%zu checks, %.2f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), c.checks,
                secs);
    for (const auto& m : c.misses) std::printf("    %s\n", m.c_str());
    std::fflush(stdout);
    return pass;
}

const double kTable3[] = {0.0827, 0.1547, 0.1709, 0.1390, 0.1162, 0.0956, 0.0744, 0.0547, 0.0385, 0.0262};

struct Row5 {
    double alpha, variance, c1, c2, tvar;
};
const Row5 kTable5[] = {
    {3.4, 4.0509, 6.3920, 4.3958, 10.7878}, {2.5, 3.9788, 6.3703, 4.3556, 10.7259},
    {1.5, 3.8987, 6.3458, 4.3086, 10.6544}, {0.5, 3.8186, 6.3209, 4.2589, 10.5798},
    {0.0, 3.7785, 6.3083, 4.2330, 10.5413}, {-0.5, 3.7385, 6.2956, 4.2063, 10.5019},
    {-1.5, 3.6584, 6.2698, 4.1505, 10.4203}, {-2.1, 3.6103, 6.2542, 4.1154, 10.3696},
};

struct Row2 {
    double p, var, c1, c2, tvar;
};
const Row2 kTable2[] = {
    {0.9, 5.03, 7.33, 8.37, 15.70},    {0.925, 8.24, 8.85, 9.90, 18.75},   {0.95, 12.65, 11.07, 11.90, 22.97},
    {0.975, 19.96, 15.08, 14.96, 30.04}, {0.99, 29.31, 20.82, 18.34, 39.16}, {0.999, 51.88, 37.35, 24.05, 61.40},
};

SarmanovModel example_3_2(double alpha) {
    auto m = load_model(model("example_3_2.json"));
    return SarmanovModel(m.portfolios(), {{{0, 0}, {0, 1}, alpha}});
}

void criterion1(Criterion& c) {
    const auto t = cli_csv({"aggregate", model("example_3_2.json"), "--precision", "12"});
    for (int i = 2; i <= 11; ++i) c.expect("p_" + std::to_string(i), num(t.at(i - 1).at(1)), kTable3[i - 2], 5e-5);
}

void criterion2(Criterion& c) {
    const auto m = load_model(model("example_3_2.json"));
    const double want[2][4] = {{1.78, 2.27, 1.55, 6.50}, {1.26, 1.51, 1.88, 8.16}};
    const char* names[] = {"mean", "variance", "skewness", "kurtosis"};
    for (std::size_t g = 0; g < 2; ++g) {
        const auto mo = m.marginal(g).moments();
        const double got[] = {mo.mean, mo.variance, mo.skewness, mo.kurtosis};
        for (int k = 0; k < 4; ++k) c.expect("X" + std::to_string(g + 1) + " " + names[k], got[k], want[g][k], 5e-3);
    }
}

void criterion3(Criterion& c) {
    std::vector<std::string> args{"allocate", model("example_3_2.json"), "--p", "0.99", "--precision", "12"};
    for (const auto& r : kTable5) args.insert(args.end(), {"--alpha", std::to_string(r.alpha)});
    const auto t = cli_csv(args);
    for (std::size_t i = 0; i < std::size(kTable5); ++i) {
        const auto& r = kTable5[i];
        const std::string a = "alpha=" + std::to_string(r.alpha).substr(0, 4) + " ";
        c.expect(a + "variance", num(t.at(i).at(2)), r.variance, 5e-4);
        c.expect(a + "C_1", num(t.at(i).at(3)), r.c1, 5e-4);
        c.expect(a + "C_2", num(t.at(i).at(4)), r.c2, 5e-4);
        c.expect(a + "TVaR", num(t.at(i).at(5)), r.tvar, 5e-4);
    }
}

void criterion4(Criterion& c) {
    std::vector<std::string> args{"reinsure", model("example_3_6.json"), "--precision", "12"};
    for (const auto& r : kTable2) args.insert(args.end(), {"--p", std::to_string(r.p)});
    const auto t = cli_csv(args);
    for (std::size_t i = 0; i < std::size(kTable2); ++i) {
        const auto& r = kTable2[i];
        const std::string p = "p=" + t.at(i).at(0) + " ";
        c.expect(p + "VaR", num(t.at(i).at(1)), r.var, 5e-3);
        c.expect(p + "C_1", num(t.at(i).at(2)), r.c1, 5e-3);
        c.expect(p + "C_2", num(t.at(i).at(3)), r.c2, 5e-3);
        c.expect(p + "TVaR", num(t.at(i).at(4)), r.tvar, 5e-3);
    }
}

void criterion5(Criterion& c) {
    const auto t = cli_csv({"corr", model("table_6.json"), "--case", "all", "--truncation", "15", "--precision", "12"});
    // alpha_max, rho_max, alpha_min, rho_min
    const double want[4][4] = {{3.2100, 0.3023, -2.1289, -0.2005},
                               {3.5854, 0.1921, -3.000, -0.1607},
                               {0.0896, 0.0318, -0.0049, -0.0017},
                               {1.0, 0.2711, -1.0, -0.2711}};
    const char* cols[] = {"alpha_max", "rho_max", "alpha_min", "rho_min"};
    for (int k = 0; k < 4; ++k) {
        const double tol = k == 1 ? 5e-4 : 5e-5;
        for (int j = 0; j < 4; ++j) {
            c.expect("case " + std::to_string(k + 1) + " " + cols[j], num(t.at(k).at(2 + j)), want[k][j], tol);
        }
    }
}

void criterion6(Criterion& c) {
    const auto t = cli_csv({"sweep", model("table_6.json"), "--case", "all", "--truncation", "15", "--precision", "12"});
    std::map<std::string, std::vector<std::pair<double, double>>> series;  // kernel -> (beta, rho_max)
    for (const auto& row : t) series[row.at(0)].emplace_back(num(row.at(1)), num(row.at(5)));
    c.require("sweep has 20 grid points per case", series["density"].size() == 20 && series.size() == 4);
    const auto& d = series["density"];
    for (std::size_t i = 1; i < d.size(); ++i) {
        c.require("density rho_max nondecreasing at beta=" + std::to_string(d[i].first), d[i].second >= d[i - 1].second - 1e-9);
    }
    const auto& l = series["linear"];
    for (std::size_t i = 1; i < l.size(); ++i) {
        c.require("linear rho_max decreasing at beta=" + std::to_string(l[i].first), l[i].second < l[i - 1].second);
    }
    for (const char* k : {"exponential", "fgm"}) {
        double lo = 1e300, hi = -1e300;
        for (const auto& [b, r] : series[k]) lo = std::min(lo, r), hi = std::max(hi, r);
        ++c.checks;
        if (!(hi - lo < 0.02)) {
            c.misses.push_back(std::string(k) + " rho_max spread " + std::to_string(hi - lo) + " (range " +
                               std::to_string(lo) + " .. " + std::to_string(hi) + ") is not below 0.02");
        }
    }
}

void compare(Criterion& c, const std::string& label, const OracleReport& r, const std::vector<double>& truth) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& e = r.estimates[i];
        c.expect(label + r.targets[i].describe() + " (3 se = " + std::to_string(3 * e.std_error) + ")", e.value,
                 truth[i], 3.0 * e.std_error);
    }
}

void criterion7(Criterion& c) {
    using K = Target::Kind;
    OracleConfig cfg;
    cfg.sample_count = 10'000'000;
    cfg.seed = 1;

    // Example 3.2: aggregate cdf (mixing weights), marginal raw moments
    {
        const auto m = load_model(model("example_3_2.json"));
        const auto S = aggregate_single(m);
        std::vector<Target> t;
        std::vector<double> truth;
        for (double y : {1.0, 2.0, 4.0, 8.0, 12.0}) {
            t.push_back({K::AggregateCdf, {y}});
            truth.push_back(S.cdf(y));
        }
        for (std::size_t g = 0; g < 2; ++g) {
            for (int k = 1; k <= 4; ++k) {
                t.push_back({K::RawMoment, {}, 0.0, g, k});
                truth.push_back(m.marginal(g).raw_moment(k));
            }
        }
        compare(c, "example 3.2 ", run_oracle(m, cfg, t), truth);
    }
    // alpha rows: E[S], E[S^2], VaR, C_1, C_2, TVaR at 0.99
    for (const auto& row : kTable5) {
        const auto m = example_3_2(row.alpha);
        const auto S = aggregate_single(m);
        const auto a = tvar_allocate(m, 0.99);
        const std::vector<Target> t{{K::RawMoment, {}, 0.0, Target::kAggregate, 1},
                                    {K::RawMoment, {}, 0.0, Target::kAggregate, 2},
                                    {K::Var, {}, 0.99},
                                    {K::Contribution, {}, 0.99, 0},
                                    {K::Contribution, {}, 0.99, 1},
                                    {K::Tvar, {}, 0.99}};
        compare(c, "alpha=" + std::to_string(row.alpha).substr(0, 4) + " ", run_oracle(m, cfg, t),
                {S.raw_moment(1), S.raw_moment(2), a.var, a.contributions[0], a.contributions[1], a.tvar});
    }
    // Example 3.6 with deductibles
    {
        const auto m = load_model(model("example_3_6.json"));
        const ReinsuredAggregate ra(m);
        std::vector<Target> t;
        std::vector<double> truth;
        for (const auto& row : kTable2) {
            const auto a = ra.allocate(row.p);
            t.push_back({K::ReinsuredVar, {}, row.p});
            t.push_back({K::ReinsuredContribution, {}, row.p, 0});
            t.push_back({K::ReinsuredContribution, {}, row.p, 1});
            t.push_back({K::ReinsuredTvar, {}, row.p});
            truth.insert(truth.end(), {a.var, a.contributions[0], a.contributions[1], a.tvar});
        }
        compare(c, "example 3.6 ", run_oracle(m, cfg, t), truth);
    }
}

void criterion8(Criterion& c) {
    const auto o = props::run(20240611, 200);
    c.require("200 models", o.models == 200);
    c.expect("allocation additivity", o.additivity, 0.0, 1e-8);
    c.expect("reinsured allocation additivity", o.reinsured_additivity, 0.0, 1e-8);
    c.expect("squared-density identity", o.squared_density, 0.0, 1e-10);
    c.expect("rescale cdf invariance", o.rescale, 0.0, 1e-10);
    c.expect("convolution vs quadrature", o.convolve, 0.0, 1e-6);
    c.expect("transform outputs are proper laws", o.transform_weights, 0.0, 1e-9);
    c.expect("joint_df limits", o.joint_limits, 0.0, 1e-7);
    c.expect("reinsured_df limits", o.reinsured_limits, 0.0, 1e-7);
    c.expect("excess df identity", o.lemma, 0.0, 1e-10);
}

}  // namespace

int main() {
    std::vector<Criterion> all{
        {1, "mixing weights of S, Example 3.2", 1.0},
        {2, "marginal moments, Example 3.2", 0.1},
        {3, "TVaR allocation over alpha, Example 3.2", 5.0},
        {4, "stop-loss allocation, Example 3.6", 60.0},
        {5, "correlation bounds per kernel", 5.0},
        {6, "correlation bounds over the scale grid", 5.0},
        {7, "closed forms within 3 se of 1e7-sample estimates", 600.0},
        {8, "invariants on 200 random feasible models", 600.0},
    };
    const std::function<void(Criterion&)> bodies[] = {criterion1, criterion2, criterion3, criterion4,
                                                      criterion5, criterion6, criterion7, criterion8};
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) failed += report(all[i], bodies[i]) ? 0 : 1;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
