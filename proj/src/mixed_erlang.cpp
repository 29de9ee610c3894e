#include "sme/mixed_erlang.hpp"

#include "sme/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sme {
namespace {

constexpr std::size_t kModeGrid = 2048;
constexpr int kMaxBracketDoublings = 200;

std::vector<double> validated(std::vector<double> w, bool defective, bool allow_negative = false) {
    if (w.empty()) throw InvalidDistribution("mixed Erlang needs at least one weight");
    double total = 0.0;
    for (double q : w) {
        if (!std::isfinite(q) || (q < 0.0 && !allow_negative)) {
            throw InvalidDistribution("mixing weights must be finite and nonnegative");
        }
        total += q;
    }
    while (w.size() > 1 && w.back() == 0.0) w.pop_back();
    if (std::abs(total - 1.0) <= kNormalizationTolerance) {
        if (total != 1.0) {
            for (double& q : w) q /= total;
        }
        return w;
    }
    if (defective && total < 1.0) return w;
    throw InvalidDistribution("mixing weights sum to " + std::to_string(total) + ", expected 1");
}

std::vector<double> partial_coefficients(std::span<const double> q, double beta) {
    // coefficient of shape k+1 is k q_k / beta
    std::vector<double> c(q.size() + 1, 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        c[i + 1] = static_cast<double>(i + 1) * q[i] / beta;
    }
    return c;
}

}  // namespace

MixedErlang::MixedErlang(double beta, std::vector<double> weights, bool defective)
    : beta_(beta), defective_(defective) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidDistribution("scale must be positive and finite");
    series_ = ErlangSeries(validated(std::move(weights), defective), beta);
    partial_ = ErlangSeries(partial_coefficients(series_.coefficients(), beta), beta);
}

MixedErlang MixedErlang::signed_combination(double beta, std::vector<double> weights) {
    MixedErlang d(beta, {1.0});
    d.signed_ = std::any_of(weights.begin(), weights.end(), [](double q) { return q < 0.0; });
    d.series_ = ErlangSeries(validated(std::move(weights), false, true), beta);
    d.partial_ = ErlangSeries(partial_coefficients(d.series_.coefficients(), beta), beta);
    return d;
}

MixedErlang MixedErlang::erlang(std::size_t shape, double beta) {
    if (shape < 1) throw InvalidDistribution("Erlang shape must be >= 1");
    std::vector<double> w(shape, 0.0);
    w.back() = 1.0;
    return MixedErlang(beta, std::move(w));
}

double MixedErlang::raw_moment(int order) const {
    const double m = static_cast<double>(order);
    const double acc = weighted_sum([&](std::size_t k) {
        double rising = 1.0;
        for (int r = 0; r < order; ++r) rising *= static_cast<double>(k) + r;
        return rising;
    });
    return acc / std::pow(beta_, m) / mass();
}

double MixedErlang::mean() const {
    return weighted_sum([](std::size_t k) { return static_cast<double>(k); }) / beta_ / mass();
}

Moments MixedErlang::moments() const {
    const double m1 = raw_moment(1);
    const double m2 = raw_moment(2);
    const double m3 = raw_moment(3);
    const double m4 = raw_moment(4);
    const double var = m2 - m1 * m1;
    const double c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
    const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    return {m1, var, c3 / std::pow(var, 1.5), c4 / (var * var)};
}

double MixedErlang::quantile(double p, const NumericSettings& settings) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    if (p >= mass()) throw BracketFailure("quantile level exceeds the mass of a defective law");
    const Moments mo = moments();
    double lo = 0.0;
    double hi = mo.mean + 40.0 * std::sqrt(std::max(mo.variance, 0.0));
    if (!(hi > 0.0)) hi = 1.0 / beta_;
    int doublings = 0;
    while (cdf(hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxBracketDoublings) throw BracketFailure("could not bracket quantile");
    }
    // invariant: cdf(lo) < p <= cdf(hi), or lo == 0
    while (hi - lo > settings.quantile_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cdf(mid) >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double MixedErlang::partial_expectation(double x) const {
    return partial_.tail(x);
}

double MixedErlang::tvar(double p, const NumericSettings& settings) const {
    return partial_expectation(quantile(p, settings)) / (1.0 - p);
}

double MixedErlang::pdf_max() const {
    const double f0 = pdf(0.0);
    const double upper = quantile(std::min(0.99999, 0.99999 * mass()));
    const double step = upper / static_cast<double>(kModeGrid - 1);
    std::size_t best = 0;
    double best_value = f0;
    for (std::size_t i = 1; i < kModeGrid; ++i) {
        const double v = pdf(step * static_cast<double>(i));
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    double a = best == 0 ? 0.0 : step * static_cast<double>(best - 1);
    double b = step * static_cast<double>(best + 1);
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = pdf(c);
    double fd = pdf(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = pdf(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = pdf(d);
        }
    }
    return std::max({f0, best_value, pdf(0.5 * (a + b))});
}

void trim_tail(std::vector<double>& weights, double eps) {
    // shape-weighted, so tail expectations lose at most eps / beta as well
    double tail = 0.0;
    while (weights.size() > 1) {
        const double next = tail + static_cast<double>(weights.size()) * weights.back();
        if (next > eps) break;
        tail = next;
        weights.pop_back();
    }
}

MixedErlangSampler::MixedErlangSampler(const MixedErlang& d) : cumulative_(d.size()), beta_(d.scale()) {
    if (d.signed_weights()) throw InvalidDistribution("cannot sample a signed Erlang combination");
    double acc = 0.0;
    const auto q = d.weights();
    for (std::size_t i = 0; i < q.size(); ++i) {
        acc += q[i];
        cumulative_[i] = acc;
    }
}

}  // namespace sme
