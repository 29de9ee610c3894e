#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sme {

/// Shape k >= 1 and rate beta > 0 of an Erlang law.
class ErlangParams {
public:
    ErlangParams(std::size_t shape, double rate);

    std::size_t shape() const noexcept { return shape_; }
    double rate() const noexcept { return rate_; }

private:
    std::size_t shape_;
    double rate_;
};

double erlang_pdf(const ErlangParams& p, double x);
double erlang_sf(const ErlangParams& p, double x);
double erlang_cdf(const ErlangParams& p, double x);

/// Poisson probabilities e^{-lambda} lambda^j / j! for j = 0 .. out.size()-1.
void poisson_terms(double lambda, std::span<double> out);
std::vector<double> poisson_terms(double lambda, std::size_t count);

/// A signed combination sum_m c_m * Erlang(m, beta) over shapes m = 1..K,
/// with the coefficient of shape m stored at index m-1. Suffix sums of the
/// coefficients are precomputed so that every evaluation is one Poisson sweep
/// plus one dot product:
///   sum_m c_m Wbar_m(x) = sum_j P(N = j) * sum_{m > j} c_m,  N ~ Poisson(beta x).
class ErlangSeries {
public:
    ErlangSeries() = default;
    ErlangSeries(std::vector<double> coefficients, double beta);

    double beta() const noexcept { return beta_; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    /// sum_m c_m
    double total() const noexcept { return suffix_.empty() ? 0.0 : suffix_.front(); }
    /// sum_m c_m * w_m(x, beta)
    double density(double x) const;
    /// sum_m c_m * Wbar_m(x, beta)
    double tail(double x) const;
    /// sum_m c_m * W_m(x, beta)
    double head(double x) const { return total() - tail(x); }

private:
    std::vector<double> coeffs_;
    std::vector<double> suffix_;
    double beta_ = 1.0;
};

}  // namespace sme
