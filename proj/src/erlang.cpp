#include "sme/erlang.hpp"

#include "sme/error.hpp"
#include "sme/kernels.hpp"

#include <cmath>
#include <string>

namespace sme {
namespace {

// Below this the direct form beta^k x^{k-1} / (k-1)! is safe from overflow and
// cancellation; above it everything is evaluated in log-space.
constexpr std::size_t kLogSpaceShape = 20;
// e^{-lambda} stays a normal double below ~708.
constexpr double kRecurrenceLambda = 700.0;
constexpr double kSfClampThreshold = 1e-12;

void check_x(double x) {
    if (!(x >= 0.0)) throw DomainError("Erlang argument must be nonnegative, got " + std::to_string(x));
}

}  // namespace

ErlangParams::ErlangParams(std::size_t shape, double rate) : shape_(shape), rate_(rate) {
    if (shape < 1) throw InvalidDistribution("Erlang shape must be >= 1");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidDistribution("Erlang rate must be positive and finite");
}

double erlang_pdf(const ErlangParams& p, double x) {
    check_x(x);
    const auto k = p.shape();
    const double beta = p.rate();
    if (x == 0.0) return k == 1 ? beta : 0.0;
    if (k <= kLogSpaceShape) {
        double value = beta * std::exp(-beta * x);
        for (std::size_t j = 1; j < k; ++j) value *= beta * x / static_cast<double>(j);
        return value;
    }
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(beta) + (kd - 1.0) * std::log(x) - beta * x - std::lgamma(kd));
}

void poisson_terms(double lambda, std::span<double> out) {
    if (out.empty()) return;
    if (lambda == 0.0) {
        out[0] = 1.0;
        for (std::size_t j = 1; j < out.size(); ++j) out[j] = 0.0;
        return;
    }
    if (lambda < kRecurrenceLambda) {
        double term = std::exp(-lambda);
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] = term;
            term *= lambda / static_cast<double>(j + 1);
        }
        return;
    }
    const double log_lambda = std::log(lambda);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double jd = static_cast<double>(j);
        out[j] = std::exp(-lambda + jd * log_lambda - std::lgamma(jd + 1.0));
    }
}

std::vector<double> poisson_terms(double lambda, std::size_t count) {
    std::vector<double> out(count);
    poisson_terms(lambda, out);
    return out;
}

double erlang_sf(const ErlangParams& p, double x) {
    check_x(x);
    const double lambda = p.rate() * x;
    const auto k = p.shape();
    if (lambda == 0.0) return 1.0;
    if (lambda < static_cast<double>(k)) {
        // sf close to one: sum the small upper Poisson tail P(N >= k) instead,
        // whose terms decrease from j = k on
        const double kd = static_cast<double>(k);
        double term = std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
        double tail = 0.0;
        for (std::size_t j = k; term > 1e-17 * tail || tail == 0.0; ++j) {
            tail += term;
            term *= lambda / static_cast<double>(j + 1);
            if (term == 0.0) break;
        }
        return tail >= 1.0 ? 0.0 : 1.0 - tail;
    }
    double sum = 0.0;
    if (lambda < kRecurrenceLambda) {
        double term = std::exp(-lambda);
        for (std::size_t j = 0; j < k; ++j) {
            sum += term;
            term *= lambda / static_cast<double>(j + 1);
        }
    } else {
        const auto terms = poisson_terms(lambda, k);
        for (double t : terms) sum += t;
    }
    return sum > 1.0 ? 1.0 : sum;
}

double erlang_cdf(const ErlangParams& p, double x) {
    const double sf = erlang_sf(p, x);
    return sf < kSfClampThreshold ? 1.0 : 1.0 - sf;
}

ErlangSeries::ErlangSeries(std::vector<double> coefficients, double beta)
    : coeffs_(std::move(coefficients)), suffix_(coeffs_.size()), beta_(beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidDistribution("Erlang rate must be positive and finite");
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        acc += coeffs_[i];
        suffix_[i] = acc;
    }
}

double ErlangSeries::density(double x) const {
    check_x(x);
    if (coeffs_.empty()) return 0.0;
    thread_local std::vector<double> pois;
    pois.resize(coeffs_.size());
    poisson_terms(beta_ * x, pois);
    return beta_ * kernels::dot(pois, coeffs_);
}

double ErlangSeries::tail(double x) const {
    check_x(x);
    if (coeffs_.empty()) return 0.0;
    thread_local std::vector<double> pois;
    pois.resize(suffix_.size());
    poisson_terms(beta_ * x, pois);
    return kernels::dot(pois, suffix_);
}

}  // namespace sme
