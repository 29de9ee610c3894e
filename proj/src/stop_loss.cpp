#include "sme/stop_loss.hpp"

#include "sme/error.hpp"
#include "sme/kernels.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace sme {
namespace {

constexpr double kScaleRelTol = 1e-12;
constexpr int kMaxBracketDoublings = 200;

void check_common_scale(std::span<const DeltaSeries> series, double beta) {
    for (const auto& s : series) {
        if (std::abs(s.scale - beta) > kScaleRelTol * std::max(s.scale, beta)) {
            throw ScaleMismatch("Delta series must share one scale");
        }
    }
}

std::vector<double> conv(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    kernels::convolve(a, b, out);
    return out;
}

std::vector<double> size_weighted(std::span<const double> delta) {
    std::vector<double> e(delta.size());
    for (std::size_t h = 0; h < delta.size(); ++h) e[h] = static_cast<double>(h + 1) * delta[h];
    return e;
}

// acc[offset + m] += c * v[m]
void add_shifted(std::vector<double>& acc, std::size_t offset, double c, std::span<const double> v) {
    if (acc.size() < offset + v.size()) acc.resize(offset + v.size(), 0.0);
    kernels::axpy(c, v, std::span<double>(acc).subspan(offset, v.size()));
}

}  // namespace

double DeltaSeries::mass() const {
    double s = 0.0;
    for (double c : coefficients) s += c;
    return s;
}

DeltaSeries delta_series(const MixedErlang& d, double deductible) {
    if (!(deductible >= 0.0) || !std::isfinite(deductible)) throw DomainError("deductible must be finite and nonnegative");
    // Delta_k = beta^{-1} sum_j q_{j+k+1} w_{j+1}(d) = sum_j q_{j+k+1} Pois_j(beta d)
    const auto q = d.weights();
    const std::size_t K = q.size();
    const auto pois = poisson_terms(d.scale() * deductible, K);
    std::vector<double> delta(K);
    for (std::size_t k = 0; k < K; ++k) {
        delta[k] = kernels::dot(q.subspan(k), std::span<const double>(pois).first(K - k));
    }
    while (delta.size() > 1 && delta.back() == 0.0) delta.pop_back();
    return {std::move(delta), d.scale(), deductible, d};
}

double defective_df_H(std::span<const DeltaSeries> series, double y) {
    if (series.empty()) throw DomainError("need at least one Delta series");
    const double beta = series.front().scale;
    check_common_scale(series, beta);
    std::vector<double> c = series.front().coefficients;
    for (std::size_t i = 1; i < series.size(); ++i) c = conv(c, series[i].coefficients);
    // total shift m of k series sits on shape m + k, i.e. index m + k - 1
    std::vector<double> coeffs(series.size() - 1, 0.0);
    coeffs.insert(coeffs.end(), c.begin(), c.end());
    return ErlangSeries(std::move(coeffs), beta).head(y);
}

double partial_expectation_U(std::span<const DeltaSeries> others, const DeltaSeries& last, double y) {
    const double beta = last.scale;
    check_common_scale(others, beta);
    std::vector<double> c = size_weighted(last.coefficients);
    for (const auto& s : others) c = conv(c, s.coefficients);
    // shape n + k + 2 for k others, index n + k + 1
    std::vector<double> coeffs(others.size() + 1, 0.0);
    coeffs.insert(coeffs.end(), c.begin(), c.end());
    return ErlangSeries(std::move(coeffs), beta).tail(y) / beta;
}

ReinsuredAggregate::ReinsuredAggregate(const SarmanovModel& model) : settings_(model.settings()) {
    if (!model.deductibles()) throw DomainError("model has no deductibles");
    const std::size_t n = model.portfolio_count();
    if (n > kMaxReinsuredPortfolios) {
        throw DomainError("stop-loss aggregation supports at most " + std::to_string(kMaxReinsuredPortfolios) +
                          " portfolios");
    }
    const auto& d = *model.deductibles();
    const auto rep = build_representation(model);
    const double beta = rep.common_scale();
    const std::size_t subsets = std::size_t{1} << n;

    std::vector<double> cont;
    std::vector<std::vector<double>> alloc(n);
    for (const auto& term : rep.terms()) {
        std::vector<std::vector<double>> delta(n);
        std::vector<std::vector<double>> sized(n);
        std::vector<double> F(n);
        for (std::size_t a = 0; a < n; ++a) {
            delta[a] = delta_series(term.laws[a], d[a]).coefficients;
            sized[a] = size_weighted(delta[a]);
            F[a] = term.laws[a].cdf(d[a]);
        }
        // product of F over portfolios outside mask
        auto outside = [&](std::size_t mask) {
            double prod = 1.0;
            for (std::size_t a = 0; a < n; ++a) {
                if (!((mask >> a) & 1U)) prod *= F[a];
            }
            return prod;
        };
        // total-shift sequence of each subset, built from the subset minus its lowest member
        std::vector<std::vector<double>> shift(subsets);
        shift[0] = {1.0};
        for (std::size_t mask = 1; mask < subsets; ++mask) {
            const auto low = static_cast<std::size_t>(std::countr_zero(mask));
            shift[mask] = conv(shift[mask & (mask - 1)], delta[low]);
        }

        atom_ += term.coefficient * outside(0);
        for (std::size_t mask = 1; mask < subsets; ++mask) {
            const auto k = static_cast<std::size_t>(std::popcount(mask));
            add_shifted(cont, k - 1, term.coefficient * outside(mask), shift[mask]);
        }
        for (std::size_t l = 0; l < n; ++l) {
            for (std::size_t mask = 0; mask < subsets; ++mask) {
                if ((mask >> l) & 1U) continue;
                const auto k = static_cast<std::size_t>(std::popcount(mask));
                const double c = term.coefficient * outside(mask | (std::size_t{1} << l)) / beta;
                add_shifted(alloc[l], k + 1, c, conv(sized[l], shift[mask]));
            }
        }
    }
    // E[R 1{R > y}]: shape m carries mean m / beta, landing on shape m + 1
    std::vector<double> moment(cont.size() + 1, 0.0);
    for (std::size_t i = 0; i < cont.size(); ++i) moment[i + 1] = static_cast<double>(i + 1) * cont[i] / beta;
    tail_moment_ = ErlangSeries(std::move(moment), beta);
    continuous_ = ErlangSeries(std::move(cont), beta);
    for (auto& a : alloc) alloc_.emplace_back(std::move(a), beta);

    base_ = rep.base();
}

double ReinsuredAggregate::df(double y) const {
    if (!(y >= 0.0)) throw DomainError("reinsured df argument must be nonnegative");
    return atom_ + continuous_.head(y);
}

VarResult ReinsuredAggregate::var(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("probability level must lie in (0, 1)");
    if (p <= atom_) return {0.0, true};
    const std::size_t n = base_.size();
    const double level = 1.0 - (1.0 - p) / (2.0 * static_cast<double>(n));
    double hi = 0.0;
    for (std::size_t a = 0; a < n; ++a) hi += base_[a].quantile(level, settings_);
    if (!(hi > 0.0)) hi = 1.0 / scale();
    double lo = 0.0;
    int doublings = 0;
    while (df(hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxBracketDoublings) throw BracketFailure("could not bracket reinsured VaR");
    }
    while (hi - lo > settings_.reinsured_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (df(mid) >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {hi, false};
}

double ReinsuredAggregate::partial_expectation(std::size_t l, double y) const {
    return alloc_.at(l).tail(y);
}

double ReinsuredAggregate::tail_expectation(double y) const {
    return tail_moment_.tail(y);
}

AllocationReport ReinsuredAggregate::allocate(double p) const {
    const VarResult v = var(p);
    AllocationReport report;
    report.p = p;
    report.var = v.value;
    report.var_at_atom = v.at_atom;
    double sum = 0.0;
    for (std::size_t l = 0; l < alloc_.size(); ++l) {
        const double c = partial_expectation(l, v.value) / (1.0 - p);
        report.contributions.push_back(c);
        report.units.push_back("S" + std::to_string(l + 1));
        sum += c;
    }
    report.tvar = tail_moment_.tail(v.value) / (1.0 - p);
    report.additivity_residual = sum - report.tvar;
    return report;
}

double reinsured_df(const SarmanovModel& model, double y) { return ReinsuredAggregate(model).df(y); }
VarResult reinsured_var(const SarmanovModel& model, double p) { return ReinsuredAggregate(model).var(p); }
AllocationReport reinsured_allocate(const SarmanovModel& model, double p) {
    return ReinsuredAggregate(model).allocate(p);
}

}  // namespace sme
