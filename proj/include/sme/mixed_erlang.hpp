#pragma once

#include "sme/erlang.hpp"
#include "sme/settings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace sme {

struct Moments {
    double mean;
    double variance;
    double skewness;
    double kurtosis;  // non-excess
};

/// ME(beta, Q): sum_k q_k * Erlang(k, beta), with q_k stored at index k-1.
///
/// Proper laws have unit mass; weights within kNormalizationTolerance of one
/// are renormalized once on construction and anything further off is rejected
/// unless the law is flagged defective (mass strictly below one, used for the
/// internal sub-probability components of the stop-loss formulas).
/// A signed combination (see signed_combination) may carry negative weights
/// as long as the density it represents is nonnegative; the caller vouches
/// for that. Immutable after construction.
class MixedErlang {
public:
    MixedErlang(double beta, std::vector<double> weights, bool defective = false);

    static MixedErlang exponential(double beta) { return MixedErlang(beta, {1.0}); }
    static MixedErlang erlang(std::size_t shape, double beta);
    /// Unit-mass Erlang combination with some negative weights, e.g. the law
    /// of a sum of dependent risks. Not samplable.
    static MixedErlang signed_combination(double beta, std::vector<double> weights);

    double scale() const noexcept { return beta_; }
    std::span<const double> weights() const noexcept { return series_.coefficients(); }
    std::size_t size() const noexcept { return series_.size(); }
    bool defective() const noexcept { return defective_; }
    bool signed_weights() const noexcept { return signed_; }
    /// Total mass sum_k q_k (one for proper laws).
    double mass() const noexcept { return series_.total(); }

    double pdf(double x) const { return series_.density(x); }
    double sf(double x) const { return series_.tail(x); }
    double cdf(double x) const { return series_.head(x); }

    /// E[X^m] (of the mass-normalized law for defective inputs).
    double raw_moment(int order) const;
    double mean() const;
    Moments moments() const;

    /// Smallest x with cdf(x) >= p, by bracketed bisection.
    double quantile(double p, const NumericSettings& settings = {}) const;

    /// E[X 1{X > x}] = sum_k q_k (k / beta) Wbar_{k+1}(x, beta).
    double partial_expectation(double x) const;

    /// E[X | X > VaR_p(X)].
    double tvar(double p, const NumericSettings& settings = {}) const;

    /// max_x f(x) over [0, inf).
    double pdf_max() const;

    /// sum_k q_k * fn(k) over stored shapes.
    template <class Fn>
    double weighted_sum(Fn&& fn) const {
        double acc = 0.0;
        const auto q = weights();
        for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] * fn(i + 1);
        return acc;
    }

private:
    double beta_;
    bool defective_;
    bool signed_ = false;
    ErlangSeries series_;
    ErlangSeries partial_;
};

/// Drop trailing weights while sum k q_k over the dropped shapes is at most eps
/// (which bounds the dropped mass too; keeps >= 1 entry).
void trim_tail(std::vector<double>& weights, double eps);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit generator.
template <class Urng>
double uniform01(Urng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exact sampler: draw the Erlang shape from Q, then a sum of that many
/// exponentials.
class MixedErlangSampler {
public:
    explicit MixedErlangSampler(const MixedErlang& d);

    template <class Urng>
    double operator()(Urng& rng) const {
        const double u = uniform01(rng) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t shape = static_cast<std::size_t>(it - cumulative_.begin()) + 1;
        if (shape > cumulative_.size()) shape = cumulative_.size();
        double sum = 0.0;
        for (std::size_t i = 0; i < shape; ++i) sum -= std::log1p(-uniform01(rng));
        return sum / beta_;
    }

private:
    std::vector<double> cumulative_;
    double beta_;
};

}  // namespace sme
