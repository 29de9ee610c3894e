#include "sme/transforms.hpp"

#include "sme/error.hpp"
#include "sme/kernels.hpp"

#include <cmath>
#include <numbers>

namespace sme {
namespace {

constexpr double kScaleRelTol = 1e-12;

// Unnormalized weights of f^2 at scale 2 beta:
//   num_k = sum_i C(k-1, i-1) q_i q_{k+1-i} / 2^k,   k = 1 .. 2K-1,
// so that f(x)^2 = beta * sum_k num_k w_k(x, 2 beta).
std::vector<double> squared_weights(std::span<const double> q) {
    const std::size_t K = q.size();
    const std::size_t out_len = 2 * K - 1;
    std::vector<double> log_fact(out_len + 1);
    log_fact[0] = 0.0;
    for (std::size_t n = 1; n <= out_len; ++n) log_fact[n] = log_fact[n - 1] + std::log(static_cast<double>(n));

    std::vector<double> num(out_len, 0.0);
    for (std::size_t a = 0; a < K; ++a) {
        if (q[a] == 0.0) continue;
        for (std::size_t b = 0; b < K; ++b) {
            if (q[b] == 0.0) continue;
            // shapes i = a+1, k+1-i = b+1  =>  k = a+b+1, index a+b
            const std::size_t k = a + b + 1;
            const double log_c = log_fact[k - 1] - log_fact[a] - log_fact[b] - static_cast<double>(k) * std::numbers::ln2;
            num[a + b] += std::exp(log_c) * q[a] * q[b];
        }
    }
    return num;
}

bool same_scale(double a, double b) {
    return std::abs(a - b) <= kScaleRelTol * std::max(a, b);
}

}  // namespace

double expected_density(const MixedErlang& d) {
    double total = 0.0;
    for (double v : squared_weights(d.weights())) total += v;
    return d.scale() * total;
}

MixedErlang squared_density_transform(const MixedErlang& d) {
    auto num = squared_weights(d.weights());
    double total = 0.0;
    for (double v : num) total += v;
    for (double& v : num) v /= total;
    return MixedErlang(2.0 * d.scale(), std::move(num));
}

double mu_tilde(const MixedErlang& d) {
    return squared_density_transform(d).mean();
}

MixedErlang size_biased_transform(const MixedErlang& d) {
    if (d.defective()) throw InvalidDistribution("size-biased transform needs a proper law");
    const auto q = d.weights();
    std::vector<double> g(q.size() + 1, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) norm += static_cast<double>(i + 1) * q[i];
    for (std::size_t i = 0; i < q.size(); ++i) g[i + 1] = static_cast<double>(i + 1) * q[i] / norm;
    return MixedErlang(d.scale(), std::move(g));
}

MixedErlang rescale(const MixedErlang& d, double beta2, const NumericSettings& settings) {
    const double beta1 = d.scale();
    if (!(beta2 > 0.0) || !std::isfinite(beta2)) throw InvalidDistribution("target scale must be positive and finite");
    if (same_scale(beta1, beta2)) {
        return MixedErlang(beta2, std::vector<double>(d.weights().begin(), d.weights().end()), d.defective());
    }
    if (beta2 < beta1) throw RescaleDownward("cannot rescale from a finer to a coarser scale");

    // Erlang(i, beta1) = sum_{k >= i} C(k-1, k-i) r^i (1-r)^{k-i} Erlang(k, beta2)
    const double r = beta1 / beta2;
    const double log_r = std::log(r);
    const double log_1mr = std::log1p(-r);
    const auto q = d.weights();
    const std::size_t K = q.size();
    const double mass = d.mass();
    // Psi preserves the mean: sum k psi_k = (beta2 / beta1) sum i q_i
    double shape_moment = 0.0;
    for (std::size_t i = 0; i < K; ++i) shape_moment += static_cast<double>(i + 1) * q[i];
    shape_moment /= r;

    std::vector<double> psi;
    psi.reserve(K * 2);
    double cumulative = 0.0, moment = 0.0;
    for (std::size_t k = 1; k <= settings.max_terms; ++k) {
        const double lg_k = std::lgamma(static_cast<double>(k));
        double acc = 0.0;
        const std::size_t top = std::min(k, K);
        for (std::size_t i = 1; i <= top; ++i) {
            const double qi = q[i - 1];
            if (qi == 0.0) continue;
            const double log_term = lg_k - std::lgamma(static_cast<double>(i)) - std::lgamma(static_cast<double>(k - i + 1)) +
                                    static_cast<double>(i) * log_r + static_cast<double>(k - i) * log_1mr;
            acc += qi * std::exp(log_term);
        }
        psi.push_back(acc);
        cumulative += acc;
        moment += static_cast<double>(k) * acc;
        if (k >= K && mass - cumulative <= settings.series_epsilon && shape_moment - moment <= settings.series_epsilon) {
            break;
        }
    }
    return MixedErlang(beta2, std::move(psi), d.defective());
}

std::vector<double> convolve_weights(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size() + b.size(), 0.0);
    kernels::convolve(a, b, std::span<double>(out).subspan(1));
    return out;
}

MixedErlang convolve(std::span<const MixedErlang> laws, const NumericSettings& settings) {
    if (laws.empty()) throw InvalidDistribution("convolution of an empty list");
    const double beta = laws.front().scale();
    bool defective = laws.front().defective();
    std::vector<double> acc(laws.front().weights().begin(), laws.front().weights().end());
    for (std::size_t i = 1; i < laws.size(); ++i) {
        if (!same_scale(laws[i].scale(), beta)) throw ScaleMismatch("convolution operands must share one scale");
        defective = defective || laws[i].defective();
        acc = convolve_weights(acc, laws[i].weights());
        trim_tail(acc, settings.series_epsilon);
        if (acc.size() > settings.max_terms) throw ConsistencyError("convolution exceeds the term cap");
    }
    return MixedErlang(beta, std::move(acc), defective);
}

MixedErlang transform_chain(const MixedErlang& d, std::span<const TransformTag> tags, double beta2,
                            const NumericSettings& settings) {
    MixedErlang cur = d;
    for (TransformTag t : tags) {
        cur = t == TransformTag::SquaredDensity ? squared_density_transform(cur) : size_biased_transform(cur);
    }
    return rescale(cur, beta2, settings);
}

}  // namespace sme
