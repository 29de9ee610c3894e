#include "sme/dependence.hpp"

#include "sme/error.hpp"
#include "sme/sarmanov_model.hpp"
#include "sme/transforms.hpp"

#include <cmath>
#include <limits>

namespace sme {
namespace {

// Everything the correlation formula needs from one marginal.
struct KernelStats {
    double lo;     // inf phi
    double hi;     // sup phi
    double cross;  // E[X phi(X)]
    double sigma;
};

double stddev(const MixedErlang& d) {
    return std::sqrt(d.moments().variance);
}

// E[X^m 1{X <= t}] = sum_k q_k (k)_m / beta^m W_{k+m}(t)
double truncated_raw_moment(const MixedErlang& d, int m, double t) {
    const double beta = d.scale();
    double acc = 0.0;
    const auto q = d.weights();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const std::size_t k = i + 1;
        double rising = 1.0;
        for (int r = 0; r < m; ++r) rising *= static_cast<double>(k + r) / beta;
        acc += q[i] * rising * erlang_cdf(ErlangParams(k + m, beta), t);
    }
    return acc;
}

KernelStats stats(const KernelCase& kc, const MixedErlang& d, double t) {
    switch (kc.kind) {
        case KernelKind::Density: {
            const double g = expected_density(d);
            return {-g, d.pdf_max() - g, g * (mu_tilde(d) - d.mean()), stddev(d)};
        }
        case KernelKind::Exponential: {
            // E[e^{-X}] = sum q_k (beta/(beta+1))^k, E[X e^{-X}] = sum q_k k beta^k/(beta+1)^{k+1}
            const double beta = d.scale();
            const double r = beta / (beta + 1.0);
            double ge = 0.0, xe = 0.0, rk = 1.0;
            const auto q = d.weights();
            for (std::size_t i = 0; i < q.size(); ++i) {
                rk *= r;
                ge += q[i] * rk;
                xe += q[i] * static_cast<double>(i + 1) * rk / (beta + 1.0);
            }
            return {-ge, 1.0 - ge, xe - ge * d.mean(), stddev(d)};
        }
        case KernelKind::LinearTruncated: {
            if (!(t > 0.0)) throw DomainError("truncation point must be positive");
            double mu = d.mean();
            double sd = stddev(d);
            if (kc.truncated_moments) {
                const double mass = d.cdf(t);
                mu = truncated_raw_moment(d, 1, t) / mass;
                sd = std::sqrt(truncated_raw_moment(d, 2, t) / mass - mu * mu);
            }
            return {-mu, t - mu, sd * sd, sd};
        }
        case KernelKind::Fgm: {
            return {-1.0, 1.0, d.mean() - 2.0 * mean_times_cdf(d), stddev(d)};
        }
    }
    throw DomainError("unknown kernel");
}

AlphaRange corner_range(const KernelStats& a, const KernelStats& b) {
    const double products[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    for (double p : products) {
        if (p < 0.0) upper = std::min(upper, -1.0 / p);
        if (p > 0.0) lower = std::max(lower, -1.0 / p);
    }
    return {lower, upper};
}

}  // namespace

double mean_times_cdf(const MixedErlang& d) {
    // X w_m(x) = (m/beta) w_{m+1}(x) and P(Erl_n <= Erl_{m+1}) = P(Bin(n+m, 1/2) >= n)
    const auto q = d.weights();
    const std::size_t K = q.size();
    const double beta = d.scale();
    double acc = 0.0;
    for (std::size_t mi = 0; mi < K; ++mi) {
        if (q[mi] == 0.0) continue;
        const std::size_t m = mi + 1;
        for (std::size_t ni = 0; ni < K; ++ni) {
            if (q[ni] == 0.0) continue;
            const std::size_t n = ni + 1;
            const std::size_t trials = n + m;
            const double lg_t = std::lgamma(static_cast<double>(trials) + 1.0);
            double prob = 0.0;
            for (std::size_t s = n; s <= trials; ++s) {
                prob += std::exp(lg_t - std::lgamma(static_cast<double>(s) + 1.0) -
                                 std::lgamma(static_cast<double>(trials - s) + 1.0) -
                                 static_cast<double>(trials) * std::log(2.0));
            }
            acc += q[mi] * q[ni] * static_cast<double>(m) / beta * prob;
        }
    }
    return acc;
}

RhoBounds rho_bounds(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2) {
    const KernelStats a = stats(kc, d1, kc.t1);
    const KernelStats b = stats(kc, d2, kc.t2);
    AlphaRange range = corner_range(a, b);
    if (kc.kind == KernelKind::Fgm) range = {-1.0, 1.0};
    const double unit = a.cross * b.cross / (a.sigma * b.sigma);
    const double r1 = unit * range.lower, r2 = unit * range.upper;
    return {range.lower, range.upper, std::min(r1, r2), std::max(r1, r2)};
}

double pearson_rho(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2, double alpha) {
    const KernelStats a = stats(kc, d1, kc.t1);
    const KernelStats b = stats(kc, d2, kc.t2);
    const AlphaRange range = kc.kind == KernelKind::Fgm ? AlphaRange{-1.0, 1.0} : corner_range(a, b);
    constexpr double slack = 1e-12;
    if (alpha < range.lower * (1.0 + slack) || alpha > range.upper * (1.0 + slack)) {
        throw OutOfBounds("alpha " + std::to_string(alpha) + " outside [" + std::to_string(range.lower) + ", " +
                          std::to_string(range.upper) + "]");
    }
    return alpha * a.cross * b.cross / (a.sigma * b.sigma);
}

std::vector<std::string> kernel_warnings(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2) {
    std::vector<std::string> out;
    if (kc.kind != KernelKind::LinearTruncated) return out;
    const double ts[] = {kc.t1, kc.t2};
    const MixedErlang* ds[] = {&d1, &d2};
    for (int i = 0; i < 2; ++i) {
        const double q999 = ds[i]->quantile(0.999);
        if (ts[i] < q999) {
            out.push_back("truncation point T" + std::to_string(i + 1) + " = " + std::to_string(ts[i]) +
                          " is below the marginal's 0.999 quantile " + std::to_string(q999));
        }
    }
    return out;
}

std::vector<SweepRow> beta_sweep(const KernelCase& kc, const std::vector<double>& q1, const std::vector<double>& q2,
                                 const std::vector<double>& grid) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double beta : grid) {
        rows.push_back({beta, rho_bounds(kc, MixedErlang(beta, q1), MixedErlang(beta, q2))});
    }
    return rows;
}

std::string kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::Density: return "density";
        case KernelKind::Exponential: return "exponential";
        case KernelKind::LinearTruncated: return "linear";
        case KernelKind::Fgm: return "fgm";
    }
    return "?";
}

KernelKind parse_kernel_kind(const std::string& s) {
    if (s == "density" || s == "1") return KernelKind::Density;
    if (s == "exponential" || s == "2") return KernelKind::Exponential;
    if (s == "linear" || s == "3") return KernelKind::LinearTruncated;
    if (s == "fgm" || s == "4") return KernelKind::Fgm;
    throw ParseError("unknown kernel case '" + s + "' (density, exponential, linear, fgm)");
}

}  // namespace sme
