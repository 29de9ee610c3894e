#pragma once

#include "sme/mixed_erlang.hpp"
#include "sme/sarmanov_model.hpp"

#include <span>
#include <string>
#include <vector>

namespace sme {

/// Component laws for the per-portfolio sums when the kernel of one risk is
/// replaced by the squared-density transform: laws[a] is the law of S_a.
struct SingleComponent {
    std::size_t risk;  // global index
    double weight;     // sum of alpha*gamma*gamma over couplings touching the risk
    std::vector<MixedErlang> laws;
};

struct PairComponent {
    std::size_t first;  // global indices, first < second
    std::size_t second;
    double alpha;
    double weight;  // alpha * gamma_first * gamma_second
    std::vector<MixedErlang> laws;
};

/// One term of the signed combination: coefficient times the product law
/// with independent per-portfolio components.
struct SignedTerm {
    double coefficient;
    std::span<const MixedErlang> laws;
};

/// The joint law of the portfolio sums (S_1..S_n) as a signed combination of
/// products of independent mixed Erlangs, all at one common scale:
///   xi * base - sum_r w_r * single_r + sum_{pairs} w_ab * pair_ab,
/// where xi = 1 + sum of pair weights. The coefficients sum to one.
class AggregateRepresentation {
public:
    AggregateRepresentation(double xi, double common_scale, std::vector<MixedErlang> base,
                            std::vector<SingleComponent> singles, std::vector<PairComponent> pairs);

    double xi() const noexcept { return xi_; }
    double common_scale() const noexcept { return common_scale_; }
    std::size_t portfolio_count() const noexcept { return base_.size(); }
    const std::vector<MixedErlang>& base() const noexcept { return base_; }
    const std::vector<SingleComponent>& singles() const noexcept { return singles_; }
    const std::vector<PairComponent>& pairs() const noexcept { return pairs_; }
    /// Signed terms viewing this object's laws (invalidated with it).
    std::vector<SignedTerm> terms() const;

private:
    double xi_;
    double common_scale_;
    std::vector<MixedErlang> base_;
    std::vector<SingleComponent> singles_;
    std::vector<PairComponent> pairs_;
};

AggregateRepresentation build_representation(const SarmanovModel& model);

/// P(S_1 <= s_1, ..., S_n <= s_n).
double joint_df(const AggregateRepresentation& rep, std::span<const double> s);
/// Joint density of (S_1..S_n).
double joint_pdf_S(const AggregateRepresentation& rep, std::span<const double> s);

/// Collapse a one-portfolio representation's signed terms into one weight
/// vector; tiny negative weights (>= -kNormalizationTolerance) are clamped,
/// anything more negative is a ConsistencyError unless allow_signed, in which
/// case a signed combination is returned.
MixedErlang collapse_single(const AggregateRepresentation& rep, bool allow_signed = false);

/// Law of S for a one-portfolio model. A nonnegative density can still have
/// negative Erlang weights; those are accepted when the model passes
/// feasibility_check (so the joint density, hence the density of S, is
/// nonnegative) and are a ConsistencyError otherwise.
MixedErlang aggregate_single(const SarmanovModel& model);
/// Law of the sum of all risks regardless of grouping.
MixedErlang aggregate_total(const SarmanovModel& model);

struct AllocationReport {
    double p = 0.0;
    double var = 0.0;
    double tvar = 0.0;
    std::vector<std::string> units;
    std::vector<double> contributions;
    /// sum of contributions minus tvar
    double additivity_residual = 0.0;
    /// VaR fell on the point mass at zero (stop-loss only)
    bool var_at_atom = false;

    std::vector<double> shares() const;
};

/// TVaR_p of S and its Euler contributions E[X_j | S > VaR_p(S)], one per risk
/// of a one-portfolio model.
AllocationReport tvar_allocate(const SarmanovModel& model, double p);

/// CSV with header "unit,C_j,share" and a final TVaR row.
std::string allocation_csv(const AllocationReport& report, int precision);

}  // namespace sme
