#pragma once

#include "sme/aggregation.hpp"
#include "sme/mixed_erlang.hpp"
#include "sme/sarmanov_model.hpp"

#include <span>
#include <vector>

namespace sme {

/// Coefficients Delta_k(d) with (X - d)_+ restricted to {X > d} distributed as
/// the defective mixture sum_k Delta_k Erlang(k+1, beta). Delta_k is stored at
/// index k; the coefficients sum to P(X > d).
struct DeltaSeries {
    std::vector<double> coefficients;
    double scale;
    double deductible;
    MixedErlang source;

    double mass() const;
};

DeltaSeries delta_series(const MixedErlang& d, double deductible);

/// P(X_i > d_i for all i, sum (X_i - d_i) <= y) for independent sources.
double defective_df_H(std::span<const DeltaSeries> series, double y);

/// E[(X_last - d_last) 1{X_i > d_i for all i, sum of excesses > y}], with the
/// others independent of last. An empty list gives E[(X - d) 1{X - d > y}].
double partial_expectation_U(std::span<const DeltaSeries> others, const DeltaSeries& last, double y);

inline constexpr std::size_t kMaxReinsuredPortfolios = 12;

struct VarResult {
    double value;
    bool at_atom;
};

/// Law of R = sum_i (S_i - d_i)_+ for a model with deductibles. Every signed
/// term of the aggregate representation and every subset of exceeding
/// portfolios is folded into one atom at zero plus one signed Erlang
/// coefficient vector (and one more per portfolio for the allocation), so
/// evaluations after construction are single Poisson sweeps.
class ReinsuredAggregate {
public:
    explicit ReinsuredAggregate(const SarmanovModel& model);

    /// P(R = 0) = P(S <= d).
    double atom() const noexcept { return atom_; }
    double scale() const noexcept { return continuous_.beta(); }
    std::size_t portfolio_count() const noexcept { return alloc_.size(); }

    double df(double y) const;
    VarResult var(double p) const;
    /// E[(S_l - d_l)_+ 1{R > y}].
    double partial_expectation(std::size_t l, double y) const;
    /// E[R 1{R > y}], independent of the per-portfolio split.
    double tail_expectation(double y) const;
    /// TVaR is taken from tail_expectation; the residual compares it with the
    /// sum of contributions.
    AllocationReport allocate(double p) const;

private:
    double atom_ = 0.0;
    ErlangSeries continuous_;
    ErlangSeries tail_moment_;
    std::vector<ErlangSeries> alloc_;
    std::vector<MixedErlang> base_;  // independent per-portfolio laws, for the VaR bracket
    NumericSettings settings_;
};

double reinsured_df(const SarmanovModel& model, double y);
VarResult reinsured_var(const SarmanovModel& model, double p);
AllocationReport reinsured_allocate(const SarmanovModel& model, double p);

}  // namespace sme
