#include "sme/aggregation.hpp"

#include "sme/error.hpp"
#include "sme/transforms.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace sme {
namespace {

double max_scale(const SarmanovModel& model) {
    double b = 0.0;
    for (std::size_t g = 0; g < model.zeta(); ++g) b = std::max(b, model.marginal(g).scale());
    return b;
}

// Per-risk building blocks at the common scale.
struct RescaledMarginals {
    std::vector<MixedErlang> plain;    // Psi(Q)
    std::vector<MixedErlang> squared;  // Psi(V(Q))
};

RescaledMarginals rescaled_marginals(const SarmanovModel& model, double common, const NumericSettings& s) {
    RescaledMarginals out;
    for (std::size_t g = 0; g < model.zeta(); ++g) {
        const auto& m = model.marginal(g);
        out.plain.push_back(rescale(m, common, s));
        out.squared.push_back(rescale(squared_density_transform(m), common, s));
    }
    return out;
}

// Law of portfolio a's sum with the risks in vset using their squared variant.
MixedErlang portfolio_law(const SarmanovModel& model, const RescaledMarginals& rm, std::size_t a,
                          const std::set<std::size_t>& vset) {
    std::vector<MixedErlang> parts;
    for (std::size_t s = 0; s < model.portfolio_size(a); ++s) {
        const std::size_t g = model.global_index({a, s});
        parts.push_back(vset.contains(g) ? rm.squared[g] : rm.plain[g]);
    }
    return convolve(parts, model.settings());
}


void accumulate(std::vector<double>& acc, double c, std::span<const double> w) {
    if (acc.size() < w.size()) acc.resize(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) acc[i] += c * w[i];
}

}  // namespace

AggregateRepresentation::AggregateRepresentation(double xi, double common_scale, std::vector<MixedErlang> base,
                                                 std::vector<SingleComponent> singles, std::vector<PairComponent> pairs)
    : xi_(xi), common_scale_(common_scale), base_(std::move(base)), singles_(std::move(singles)), pairs_(std::move(pairs)) {}

std::vector<SignedTerm> AggregateRepresentation::terms() const {
    std::vector<SignedTerm> out;
    out.reserve(1 + singles_.size() + pairs_.size());
    out.push_back({xi_, base_});
    for (const auto& s : singles_) out.push_back({-s.weight, s.laws});
    for (const auto& p : pairs_) out.push_back({p.weight, p.laws});
    return out;
}

AggregateRepresentation build_representation(const SarmanovModel& model) {
    const double common = 2.0 * max_scale(model);
    const auto& settings = model.settings();
    const auto rm = rescaled_marginals(model, common, settings);
    const std::size_t n = model.portfolio_count();

    std::vector<MixedErlang> base;
    for (std::size_t a = 0; a < n; ++a) base.push_back(portfolio_law(model, rm, a, {}));

    double xi = 1.0;
    std::map<std::size_t, double> single_weight;
    std::vector<PairComponent> pairs;
    for (const auto& c : model.couplings()) {
        const double w = c.alpha * model.gamma(c.i) * model.gamma(c.j);
        xi += w;
        single_weight[c.i] += w;
        single_weight[c.j] += w;
        const std::set<std::size_t> vset{c.i, c.j};
        std::vector<MixedErlang> laws = base;
        const std::size_t pa = model.risk_id(c.i).portfolio;
        const std::size_t pb = model.risk_id(c.j).portfolio;
        laws[pa] = portfolio_law(model, rm, pa, vset);
        if (pb != pa) laws[pb] = portfolio_law(model, rm, pb, vset);
        pairs.push_back({c.i, c.j, c.alpha, w, std::move(laws)});
    }

    std::vector<SingleComponent> singles;
    for (const auto& [g, w] : single_weight) {
        std::vector<MixedErlang> laws = base;
        const std::size_t pa = model.risk_id(g).portfolio;
        laws[pa] = portfolio_law(model, rm, pa, {g});
        singles.push_back({g, w, std::move(laws)});
    }
    return AggregateRepresentation(xi, common, std::move(base), std::move(singles), std::move(pairs));
}

double joint_df(const AggregateRepresentation& rep, std::span<const double> s) {
    if (s.size() != rep.portfolio_count()) throw DomainError("expected one threshold per portfolio");
    double total = 0.0;
    for (const auto& t : rep.terms()) {
        double prod = t.coefficient;
        for (std::size_t a = 0; a < s.size(); ++a) prod *= t.laws[a].cdf(s[a]);
        total += prod;
    }
    return total;
}

double joint_pdf_S(const AggregateRepresentation& rep, std::span<const double> s) {
    if (s.size() != rep.portfolio_count()) throw DomainError("expected one coordinate per portfolio");
    double total = 0.0;
    for (const auto& t : rep.terms()) {
        double prod = t.coefficient;
        for (std::size_t a = 0; a < s.size(); ++a) prod *= t.laws[a].pdf(s[a]);
        total += prod;
    }
    return total;
}

MixedErlang collapse_single(const AggregateRepresentation& rep, bool allow_signed) {
    if (rep.portfolio_count() != 1) throw DomainError("collapse needs a one-portfolio representation");
    std::vector<double> w;
    for (const auto& t : rep.terms()) accumulate(w, t.coefficient, t.laws[0].weights());
    const double worst = *std::min_element(w.begin(), w.end());
    if (worst < -kNormalizationTolerance) {
        if (!allow_signed) throw ConsistencyError("aggregate mixing weight " + std::to_string(worst) + " is negative");
        double total = 0.0;
        for (double v : w) total += v;
        for (double& v : w) v /= total;
        return MixedErlang::signed_combination(rep.common_scale(), std::move(w));
    }
    for (double& v : w) v = std::max(v, 0.0);
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return MixedErlang(rep.common_scale(), std::move(w));
}

namespace {

MixedErlang collapse_checked(const SarmanovModel& model, const AggregateRepresentation& rep) {
    try {
        return collapse_single(rep);
    } catch (const ConsistencyError&) {
        if (feasibility_check(model).status != Feasibility::Feasible) throw;
        return collapse_single(rep, true);
    }
}

}  // namespace

MixedErlang aggregate_single(const SarmanovModel& model) {
    if (model.portfolio_count() != 1) throw DomainError("aggregate_single needs a one-portfolio model");
    return collapse_checked(model, build_representation(model));
}

MixedErlang aggregate_total(const SarmanovModel& model) {
    if (model.portfolio_count() == 1) return aggregate_single(model);
    return aggregate_single(model.with_deductibles(std::nullopt).flattened());
}

std::vector<double> AllocationReport::shares() const {
    std::vector<double> out;
    for (double c : contributions) out.push_back(c / tvar);
    return out;
}

AllocationReport tvar_allocate(const SarmanovModel& model, double p) {
    if (model.portfolio_count() != 1) throw DomainError("tvar_allocate needs a one-portfolio model");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("probability level must lie in (0, 1)");
    const auto& settings = model.settings();
    const auto rep = build_representation(model);
    const MixedErlang S = collapse_checked(model, rep);
    const double common = rep.common_scale();
    const std::size_t k = model.zeta();

    AllocationReport report;
    report.p = p;
    report.var = S.quantile(p, settings);
    report.tvar = S.partial_expectation(report.var) / (1.0 - p);

    std::vector<double> mu(k), mut(k);
    std::vector<MixedErlang> plain, squared, biased, biased_squared;
    for (std::size_t g = 0; g < k; ++g) {
        const auto& m = model.marginal(g);
        const auto v = squared_density_transform(m);
        mu[g] = m.mean();
        mut[g] = v.mean();
        plain.push_back(rescale(m, common, settings));
        squared.push_back(rescale(v, common, settings));
        biased.push_back(rescale(size_biased_transform(m), common, settings));
        biased_squared.push_back(rescale(size_biased_transform(v), common, settings));
    }

    for (std::size_t j = 0; j < k; ++j) {
        // Law of S with risk j size-biased and the risks in vset squared.
        auto law = [&](std::initializer_list<std::size_t> vset) {
            std::vector<MixedErlang> parts;
            for (std::size_t i = 0; i < k; ++i) {
                const bool in_v = std::find(vset.begin(), vset.end(), i) != vset.end();
                if (i == j) {
                    parts.push_back(in_v ? biased_squared[i] : biased[i]);
                } else {
                    parts.push_back(in_v ? squared[i] : plain[i]);
                }
            }
            return convolve(parts, settings);
        };
        auto phi = [&](std::initializer_list<std::size_t> vset) {
            return std::find(vset.begin(), vset.end(), j) != vset.end() ? mut[j] : mu[j];
        };

        std::vector<double> z;
        accumulate(z, rep.xi() * mu[j], law({}).weights());
        for (const auto& c : model.couplings()) {
            const double w = c.alpha * model.gamma(c.i) * model.gamma(c.j);
            accumulate(z, -w * phi({c.j}), law({c.j}).weights());
            accumulate(z, -w * phi({c.i}), law({c.i}).weights());
            accumulate(z, w * phi({c.i, c.j}), law({c.i, c.j}).weights());
        }
        const ErlangSeries series(std::move(z), common);
        report.contributions.push_back(series.tail(report.var) / (1.0 - p));
        report.units.push_back("X" + std::to_string(j + 1));
    }
    double sum = 0.0;
    for (double c : report.contributions) sum += c;
    report.additivity_residual = sum - report.tvar;
    return report;
}

std::string allocation_csv(const AllocationReport& report, int precision) {
    std::string out = "unit,C_j,share\n";
    char buf[128];
    const auto shares = report.shares();
    for (std::size_t i = 0; i < report.units.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.*f,%.*f\n", report.units[i].c_str(), precision, report.contributions[i],
                      precision, shares[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "TVaR,%.*f,%.*f\n", precision, report.tvar, precision, 1.0);
    out += buf;
    return out;
}

}  // namespace sme
