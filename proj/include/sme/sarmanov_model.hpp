#pragma once

#include "sme/mixed_erlang.hpp"
#include "sme/settings.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sme {

/// Risk s of portfolio a, both zero-based.
struct RiskId {
    std::size_t portfolio;
    std::size_t index;
    friend bool operator==(const RiskId&, const RiskId&) = default;
};

struct PairCoefficient {
    RiskId first;
    RiskId second;
    double alpha;
};

/// A nonzero coupling between two risks by global (flattened) index, i < j.
struct Coupling {
    std::size_t i;
    std::size_t j;
    double alpha;
};

/// Multivariate Sarmanov model with mixed Erlang marginals and kernels
/// phi_i(x) = f_i(x) - gamma_i. Risks are grouped into portfolios; the joint
/// density is prod f_i * (1 + sum_{i<j} alpha_ij phi_i phi_j) over all risks.
class SarmanovModel {
public:
    SarmanovModel(std::vector<std::vector<MixedErlang>> portfolios, std::vector<PairCoefficient> couplings,
                  std::optional<std::vector<double>> deductibles = std::nullopt, NumericSettings settings = {});

    std::size_t portfolio_count() const noexcept { return portfolios_.size(); }
    std::size_t portfolio_size(std::size_t a) const { return portfolios_.at(a).size(); }
    /// Total number of risks.
    std::size_t zeta() const noexcept { return marginals_.size(); }

    const std::vector<std::vector<MixedErlang>>& portfolios() const noexcept { return portfolios_; }
    const MixedErlang& marginal(std::size_t g) const { return marginals_.at(g); }
    const MixedErlang& marginal(RiskId r) const { return marginals_.at(global_index(r)); }
    std::size_t global_index(RiskId r) const;
    RiskId risk_id(std::size_t g) const { return ids_.at(g); }

    double gamma(std::size_t g) const { return gamma_.at(g); }
    double density_max(std::size_t g) const { return density_max_.at(g); }
    double alpha(std::size_t i, std::size_t j) const { return alpha_[i * zeta() + j]; }
    double alpha(RiskId a, RiskId b) const { return alpha(global_index(a), global_index(b)); }
    const std::vector<Coupling>& couplings() const noexcept { return couplings_; }

    const std::optional<std::vector<double>>& deductibles() const noexcept { return deductibles_; }
    const NumericSettings& settings() const noexcept { return settings_; }

    /// Same risks and couplings regrouped as one portfolio.
    SarmanovModel flattened() const;
    /// Same model with different (or no) deductibles.
    SarmanovModel with_deductibles(std::optional<std::vector<double>> deductibles) const;

    /// 1 + sum_{i<j} alpha_ij phi_i(x_i) phi_j(x_j) for flattened x.
    double bracket(std::span<const double> x) const;

private:
    std::vector<std::vector<MixedErlang>> portfolios_;
    std::vector<MixedErlang> marginals_;
    std::vector<RiskId> ids_;
    std::vector<std::size_t> offsets_;
    std::vector<double> alpha_;
    std::vector<Coupling> couplings_;
    std::vector<double> gamma_;
    std::vector<double> density_max_;
    std::optional<std::vector<double>> deductibles_;
    NumericSettings settings_;
};

struct AlphaRange {
    double lower;
    double upper;
};

/// Admissible alpha for a bivariate model with these marginals and the
/// f - gamma kernel: the bracket must stay nonnegative at all four corners.
AlphaRange alpha_bounds_bivariate(const MixedErlang& d1, const MixedErlang& d2);

enum class Feasibility { Feasible, Infeasible, Undetermined };

struct FeasibilityResult {
    Feasibility status;
    /// Smallest bracket value found (exact over all corners when determined).
    double min_bracket;
    /// Kernel values phi_i at the minimizing corner.
    std::vector<double> witness;
    /// Number of corners examined.
    std::uint64_t corners_examined;
};

/// The bracket is multilinear in phi over a box, so its minimum over the
/// density support sits on a corner phi_i in {-gamma_i, M_i - gamma_i}.
/// Up to kExhaustiveCorners risks every corner is visited (Gray order);
/// beyond that a fixed number of random corners is sampled.
FeasibilityResult feasibility_check(const SarmanovModel& model, std::uint64_t seed = 0x5eed);

inline constexpr std::size_t kExhaustiveCorners = 20;
inline constexpr std::uint64_t kSampledCorners = 1000000;

/// Joint density at flattened x.
double joint_pdf(const SarmanovModel& model, std::span<const double> x);

}  // namespace sme
