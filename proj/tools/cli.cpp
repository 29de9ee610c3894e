#include "cli.hpp"

#include "sme/aggregation.hpp"
#include "sme/dependence.hpp"
#include "sme/error.hpp"
#include "sme/kernels.hpp"
#include "sme/mc_oracle.hpp"
#include "sme/model_io.hpp"
#include "sme/stop_loss.hpp"
#include "sme/transforms.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace sme::cli {
namespace {

struct Options {
    std::string model_path;
    std::vector<double> levels;
    std::vector<double> alphas;
    std::vector<std::string> cases;
    std::vector<double> betas;
    std::string out_format = "csv";
    std::uint64_t seed = 1;
    std::uint64_t samples = 1'000'000;
    int precision = 4;
    std::optional<double> truncation;
    bool truncated_moments = false;
};

// Distinguishes the exit paths that are not numerical failures.
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

// levels and alphas are inputs: print them as given, not at the data precision
std::string exact(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string join_row(const std::vector<double>& values, int precision) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += fmt(values[i], precision);
    }
    return s;
}

SarmanovModel load(const Options& o) { return load_model(o.model_path); }

void require_feasible(const SarmanovModel& m, std::ostream& err) {
    const auto f = feasibility_check(m);
    if (f.status == Feasibility::Infeasible) {
        std::ostringstream w;
        w << "model is infeasible: bracket " << f.min_bracket << " < 0 at phi = (";
        for (std::size_t i = 0; i < f.witness.size(); ++i) w << (i ? ", " : "") << f.witness[i];
        w << ")";
        throw Infeasible(w.str());
    }
    if (f.status == Feasibility::Undetermined) {
        err << "warning: feasibility undetermined (" << m.zeta() << " risks; " << f.corners_examined
            << " sampled corners, none violating)\n";
    }
}

std::vector<double> levels_or_default(const Options& o, std::vector<double> fallback) {
    const auto& v = o.levels.empty() ? fallback : o.levels;
    for (double p : v) {
        if (!(p > 0.0 && p < 1.0)) throw ParseError("--p must lie in (0, 1)");
    }
    return v;
}

void cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    std::ostringstream s;
    s << "risks: " << m.zeta() << " in " << m.portfolio_count() << " portfolio(s)\n";
    s << "risk,beta,gamma,M\n";
    for (std::size_t g = 0; g < m.zeta(); ++g) {
        const RiskId r = m.risk_id(g);
        s << "X" << r.index + 1 << "^(" << r.portfolio + 1 << ")," << m.marginal(g).scale() << ','
          << fmt(m.gamma(g), 6) << ',' << fmt(m.density_max(g), 6) << '\n';
    }
    s << "pair,alpha,alpha_min,alpha_max\n";
    for (const auto& c : m.couplings()) {
        const auto b = alpha_bounds_bivariate(m.marginal(c.i), m.marginal(c.j));
        const RiskId a = m.risk_id(c.i), bb = m.risk_id(c.j);
        s << "(" << a.portfolio + 1 << "," << a.index + 1 << ")-(" << bb.portfolio + 1 << "," << bb.index + 1 << "),"
          << c.alpha << ',' << fmt(b.lower, 6) << ',' << fmt(b.upper, 6) << '\n';
    }
    const auto f = feasibility_check(m);
    switch (f.status) {
        case Feasibility::Feasible:
            s << "feasible (minimum bracket " << fmt(f.min_bracket, 6) << " over " << f.corners_examined << " corners)\n";
            break;
        case Feasibility::Undetermined:
            s << "undetermined (minimum bracket " << fmt(f.min_bracket, 6) << " over " << f.corners_examined
              << " sampled corners)\n";
            break;
        case Feasibility::Infeasible: {
            s << "infeasible (bracket " << fmt(f.min_bracket, 6) << " at phi = (";
            for (std::size_t i = 0; i < f.witness.size(); ++i) s << (i ? ", " : "") << fmt(f.witness[i], 6);
            s << "))\n";
            out << s.str();
            throw Infeasible("model is infeasible");
        }
    }
    out << s.str();
    (void)err;
}

void cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    require_feasible(m, err);
    const MixedErlang S = aggregate_total(m);
    if (S.signed_weights()) err << "note: some mixing weights are negative; the density of S is nonnegative\n";
    if (o.out_format == "json") {
        out << to_json(S).dump(2) << '\n';
        return;
    }
    std::ostringstream s;
    s << "i,p_i\n";
    const auto w = S.weights();
    for (std::size_t i = 0; i < w.size(); ++i) s << i + 1 << ',' << fmt(w[i], o.precision) << '\n';
    out << "# scale " << fmt(S.scale(), o.precision) << '\n' << s.str();
}

SarmanovModel with_single_alpha(const SarmanovModel& m, double alpha) {
    if (m.zeta() != 2) throw ParseError("--alpha needs a model with exactly two risks");
    return SarmanovModel(m.portfolios(), {{m.risk_id(0), m.risk_id(1), alpha}}, m.deductibles(), m.settings());
}

void cmd_allocate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto loaded = load(o);
    const auto levels = levels_or_default(o, {0.99});
    std::vector<std::optional<double>> alphas;
    if (o.alphas.empty()) alphas.push_back(std::nullopt);
    for (double a : o.alphas) alphas.push_back(a);

    std::ostringstream s;
    nlohmann::json rows = nlohmann::json::array();
    bool header = false;
    for (const auto& alpha : alphas) {
        const auto base = alpha ? with_single_alpha(loaded, *alpha) : loaded;
        require_feasible(base, err);
        const auto flat = base.with_deductibles(std::nullopt).flattened();
        const double variance = aggregate_single(flat).moments().variance;
        for (double p : levels) {
            const auto r = tvar_allocate(flat, p);
            if (o.out_format == "json") {
                auto j = to_json(r);
                j["variance"] = variance;
                if (alpha) j["alpha"] = *alpha;
                rows.push_back(std::move(j));
                continue;
            }
            if (!header) {
                if (alpha) s << "alpha,";
                s << "p,variance";
                for (const auto& u : r.units) s << ",C_" << u.substr(1);
                s << ",TVaR\n";
                header = true;
            }
            if (alpha) s << exact(*alpha) << ',';
            std::vector<double> row{variance};
            row.insert(row.end(), r.contributions.begin(), r.contributions.end());
            row.push_back(r.tvar);
            s << exact(p) << ',' << join_row(row, o.precision) << '\n';
        }
    }
    out << (o.out_format == "json" ? rows.dump(2) + "\n" : s.str());
}

void cmd_reinsure(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    if (!m.deductibles()) throw ParseError("model has no deductibles");
    require_feasible(m, err);
    const auto levels = levels_or_default(o, {0.9, 0.925, 0.95, 0.975, 0.99, 0.999});
    const ReinsuredAggregate agg(m);
    std::ostringstream s;
    nlohmann::json rows = nlohmann::json::array();
    s << "p,VaR";
    for (std::size_t l = 0; l < m.portfolio_count(); ++l) s << ",C_" << l + 1;
    s << ",TVaR\n";
    for (double p : levels) {
        const auto r = agg.allocate(p);
        if (r.var_at_atom) err << "warning: p = " << p << " falls on the atom at zero\n";
        if (o.out_format == "json") {
            rows.push_back(to_json(r));
            continue;
        }
        std::vector<double> row{r.var};
        row.insert(row.end(), r.contributions.begin(), r.contributions.end());
        row.push_back(r.tvar);
        s << exact(p) << ',' << join_row(row, o.precision) << '\n';
    }
    out << (o.out_format == "json" ? rows.dump(2) + "\n" : s.str());
}

std::vector<KernelCase> kernel_cases(const Options& o) {
    std::vector<std::string> names = o.cases;
    if (names.empty() || (names.size() == 1 && names[0] == "all")) {
        names = {"density", "exponential", "linear", "fgm"};
    }
    std::vector<KernelCase> out;
    for (const auto& n : names) {
        KernelCase kc;
        kc.kind = parse_kernel_kind(n);
        if (kc.kind == KernelKind::LinearTruncated) {
            if (!o.truncation) throw ParseError("the linear kernel needs --truncation");
            kc.t1 = kc.t2 = *o.truncation;
            kc.truncated_moments = o.truncated_moments;
        }
        out.push_back(kc);
    }
    return out;
}

void cmd_corr(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    if (m.zeta() != 2) throw ParseError("corr needs a model with exactly two risks");
    std::ostringstream s;
    nlohmann::json rows = nlohmann::json::array();
    s << "case,kernel,alpha_max,rho_max,alpha_min,rho_min\n";
    for (const auto& kc : kernel_cases(o)) {
        for (const auto& w : kernel_warnings(kc, m.marginal(0), m.marginal(1))) err << "warning: " << w << '\n';
        const auto b = rho_bounds(kc, m.marginal(0), m.marginal(1));
        const int number = static_cast<int>(kc.kind) + 1;
        if (o.out_format == "json") {
            rows.push_back({{"case", number},
                            {"kernel", kernel_name(kc.kind)},
                            {"alpha_max", b.alpha_max},
                            {"rho_max", b.rho_max},
                            {"alpha_min", b.alpha_min},
                            {"rho_min", b.rho_min}});
            continue;
        }
        s << number << ',' << kernel_name(kc.kind) << ','
          << join_row({b.alpha_max, b.rho_max, b.alpha_min, b.rho_min}, o.precision) << '\n';
    }
    out << (o.out_format == "json" ? rows.dump(2) + "\n" : s.str());
}

void cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    if (m.zeta() != 2) throw ParseError("sweep needs a model with exactly two risks");
    std::vector<double> grid = o.betas;
    if (grid.empty()) {
        for (int i = 1; i <= 20; ++i) grid.push_back(0.25 * i);
    }
    const auto q1 = std::vector<double>(m.marginal(0).weights().begin(), m.marginal(0).weights().end());
    const auto q2 = std::vector<double>(m.marginal(1).weights().begin(), m.marginal(1).weights().end());
    std::ostringstream s;
    nlohmann::json rows = nlohmann::json::array();
    s << "case,beta,alpha_min,alpha_max,rho_min,rho_max\n";
    for (const auto& kc : kernel_cases(o)) {
        for (const auto& row : beta_sweep(kc, q1, q2, grid)) {
            const auto& b = row.bounds;
            if (o.out_format == "json") {
                rows.push_back({{"case", kernel_name(kc.kind)},
                                {"beta", row.beta},
                                {"alpha_min", b.alpha_min},
                                {"alpha_max", b.alpha_max},
                                {"rho_min", b.rho_min},
                                {"rho_max", b.rho_max}});
                continue;
            }
            s << kernel_name(kc.kind) << ','
              << join_row({row.beta, b.alpha_min, b.alpha_max, b.rho_min, b.rho_max}, o.precision) << '\n';
        }
    }
    (void)err;
    out << (o.out_format == "json" ? rows.dump(2) + "\n" : s.str());
}

void cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto m = load(o);
    require_feasible(m, err);
    if (o.samples < 10000) throw ParseError("--samples must be at least 10000");
    const auto levels = levels_or_default(o, {0.99});
    using K = Target::Kind;
    std::vector<Target> targets;
    targets.push_back({K::RawMoment, {}, 0.0, Target::kAggregate, 1});
    targets.push_back({K::RawMoment, {}, 0.0, Target::kAggregate, 2});
    for (double p : levels) {
        if (m.deductibles()) {
            targets.push_back({K::ReinsuredVar, {}, p});
            for (std::size_t l = 0; l < m.portfolio_count(); ++l) targets.push_back({K::ReinsuredContribution, {}, p, l});
            targets.push_back({K::ReinsuredTvar, {}, p});
        } else {
            targets.push_back({K::Var, {}, p});
            for (std::size_t j = 0; j < m.zeta(); ++j) targets.push_back({K::Contribution, {}, p, j});
            targets.push_back({K::Tvar, {}, p});
        }
    }
    OracleConfig cfg;
    cfg.sample_count = o.samples;
    cfg.seed = o.seed;
    const auto report = run_oracle(m, cfg, targets);
    if (o.out_format == "json") {
        out << to_json(report).dump(2) << '\n';
        return;
    }
    std::ostringstream s;
    s << "target,estimate,std_error,samples,seed\n";
    for (std::size_t t = 0; t < targets.size(); ++t) {
        s << '"' << targets[t].describe() << "\"," << fmt(report.estimates[t].value, o.precision) << ','
          << fmt(report.estimates[t].std_error, o.precision) << ',' << report.samples << ',' << report.seed << '\n';
    }
    out << s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact risk aggregation and TVaR allocation for Sarmanov mixed-Erlang models"};
    app.require_subcommand(1);
    Options o;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", o.model_path, "Model file (JSON)")->required();
        sub->add_option("--out", o.out_format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--precision", o.precision, "Decimals in CSV output")->check(CLI::Range(0, 17));
    };
    auto* validate = app.add_subcommand("validate", "Print gammas, density maxima, alpha bounds and feasibility");
    validate->add_option("model", o.model_path, "Model file (JSON)")->required();
    auto* aggregate = app.add_subcommand("aggregate", "Mixing weights of the total loss");
    add_model(aggregate);
    auto* allocate = app.add_subcommand("allocate", "TVaR and per-risk allocation without reinsurance");
    add_model(allocate);
    allocate->add_option("--p", o.levels, "Tolerance level (repeatable)");
    allocate->add_option("--alpha", o.alphas, "Override the coefficient of a two-risk model (repeatable)");
    auto* reinsure = app.add_subcommand("reinsure", "VaR, TVaR and per-portfolio allocation after stop-loss");
    add_model(reinsure);
    reinsure->add_option("--p", o.levels, "Tolerance level (repeatable)");
    auto* corr = app.add_subcommand("corr", "Pearson correlation bounds per kernel for a two-risk model");
    add_model(corr);
    auto* sweep = app.add_subcommand("sweep", "Correlation bounds over a common scale grid");
    add_model(sweep);
    for (auto* sub : {corr, sweep}) {
        sub->add_option("--case", o.cases, "density|exponential|linear|fgm|all (repeatable)");
        sub->add_option("--truncation", o.truncation, "Truncation point for the linear kernel");
        sub->add_flag("--truncated-moments", o.truncated_moments, "Linear kernel: use truncated moments");
    }
    sweep->add_option("--beta", o.betas, "Scale grid point (repeatable; default 0.25..5 step 0.25)");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimates of the risk measures");
    add_model(simulate);
    simulate->add_option("--p", o.levels, "Tolerance level (repeatable)");
    simulate->add_option("--seed", o.seed, "Random seed");
    simulate->add_option("--samples", o.samples, "Number of samples");

    std::vector<std::string> argv_store{"sme-cli"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }

    std::ostringstream buffer;
    try {
        if (*validate) cmd_validate(o, buffer, err);
        if (*aggregate) cmd_aggregate(o, buffer, err);
        if (*allocate) cmd_allocate(o, buffer, err);
        if (*reinsure) cmd_reinsure(o, buffer, err);
        if (*corr) cmd_corr(o, buffer, err);
        if (*sweep) cmd_sweep(o, buffer, err);
        if (*simulate) cmd_simulate(o, buffer, err);
    } catch (const Infeasible& e) {
        out << buffer.str();
        err << "error: " << e.what() << '\n';
        return kInfeasible;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericFailure;
    }
    out << buffer.str();
    return kOk;
}

}  // namespace sme::cli
