#include "sme/sarmanov_model.hpp"

#include "sme/error.hpp"
#include "sme/transforms.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sme {
namespace {

constexpr double kInfeasibleTolerance = 1e-12;

std::string describe(RiskId r) {
    return "(" + std::to_string(r.portfolio + 1) + "," + std::to_string(r.index + 1) + ")";
}

}  // namespace

SarmanovModel::SarmanovModel(std::vector<std::vector<MixedErlang>> portfolios, std::vector<PairCoefficient> couplings,
                             std::optional<std::vector<double>> deductibles, NumericSettings settings)
    : portfolios_(std::move(portfolios)), deductibles_(std::move(deductibles)), settings_(settings) {
    if (portfolios_.empty()) throw InvalidDistribution("model needs at least one portfolio");
    for (std::size_t a = 0; a < portfolios_.size(); ++a) {
        if (portfolios_[a].empty()) throw InvalidDistribution("portfolio " + std::to_string(a + 1) + " is empty");
        offsets_.push_back(marginals_.size());
        for (std::size_t s = 0; s < portfolios_[a].size(); ++s) {
            if (portfolios_[a][s].defective() || portfolios_[a][s].signed_weights()) {
                throw InvalidDistribution("marginals must be proper laws with nonnegative weights");
            }
            marginals_.push_back(portfolios_[a][s]);
            ids_.push_back({a, s});
        }
    }
    const std::size_t z = marginals_.size();
    alpha_.assign(z * z, 0.0);
    std::vector<bool> seen(z * z, false);
    for (const auto& c : couplings) {
        const std::size_t i = global_index(c.first);
        const std::size_t j = global_index(c.second);
        if (i == j) throw InvalidDistribution("coupling of risk " + describe(c.first) + " with itself");
        if (!std::isfinite(c.alpha)) throw InvalidDistribution("coupling coefficients must be finite");
        if (seen[i * z + j]) {
            throw InvalidDistribution("duplicate coupling " + describe(c.first) + "-" + describe(c.second));
        }
        seen[i * z + j] = seen[j * z + i] = true;
        alpha_[i * z + j] = alpha_[j * z + i] = c.alpha;
    }
    for (std::size_t i = 0; i < z; ++i) {
        for (std::size_t j = i + 1; j < z; ++j) {
            if (alpha_[i * z + j] != 0.0) couplings_.push_back({i, j, alpha_[i * z + j]});
        }
    }
    if (deductibles_) {
        if (deductibles_->size() != portfolios_.size()) {
            throw InvalidDistribution("expected one deductible per portfolio");
        }
        for (double d : *deductibles_) {
            if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("deductibles must be finite and nonnegative");
        }
    }
    gamma_.reserve(z);
    density_max_.reserve(z);
    for (const auto& m : marginals_) {
        gamma_.push_back(expected_density(m));
        density_max_.push_back(m.pdf_max());
    }
}

std::size_t SarmanovModel::global_index(RiskId r) const {
    if (r.portfolio >= portfolios_.size() || r.index >= portfolios_[r.portfolio].size()) {
        throw OutOfBounds("no risk " + describe(r) + " in model");
    }
    return offsets_[r.portfolio] + r.index;
}

SarmanovModel SarmanovModel::flattened() const {
    std::vector<PairCoefficient> pairs;
    pairs.reserve(couplings_.size());
    for (const auto& c : couplings_) pairs.push_back({{0, c.i}, {0, c.j}, c.alpha});
    std::optional<std::vector<double>> ded;
    if (deductibles_) {
        if (portfolios_.size() != 1) throw DomainError("cannot flatten a model with per-portfolio deductibles");
        ded = deductibles_;
    }
    return SarmanovModel({marginals_}, std::move(pairs), std::move(ded), settings_);
}

SarmanovModel SarmanovModel::with_deductibles(std::optional<std::vector<double>> deductibles) const {
    std::vector<PairCoefficient> pairs;
    pairs.reserve(couplings_.size());
    for (const auto& c : couplings_) pairs.push_back({ids_[c.i], ids_[c.j], c.alpha});
    return SarmanovModel(portfolios_, std::move(pairs), std::move(deductibles), settings_);
}

double SarmanovModel::bracket(std::span<const double> x) const {
    if (x.size() != zeta()) throw DomainError("expected " + std::to_string(zeta()) + " coordinates");
    double b = 1.0;
    for (const auto& c : couplings_) {
        b += c.alpha * (marginals_[c.i].pdf(x[c.i]) - gamma_[c.i]) * (marginals_[c.j].pdf(x[c.j]) - gamma_[c.j]);
    }
    return b;
}

AlphaRange alpha_bounds_bivariate(const MixedErlang& d1, const MixedErlang& d2) {
    const double g1 = expected_density(d1), g2 = expected_density(d2);
    const double m1 = d1.pdf_max(), m2 = d2.pdf_max();
    // 1 + alpha * u * v >= 0 at every corner (u, v) of the kernel box
    const double lo1 = -g1, hi1 = m1 - g1, lo2 = -g2, hi2 = m2 - g2;
    const double products[] = {lo1 * lo2, lo1 * hi2, hi1 * lo2, hi1 * hi2};
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    for (double p : products) {
        if (p < 0.0) upper = std::min(upper, -1.0 / p);
        if (p > 0.0) lower = std::max(lower, -1.0 / p);
    }
    return {lower, upper};
}

FeasibilityResult feasibility_check(const SarmanovModel& model, std::uint64_t seed) {
    const std::size_t z = model.zeta();
    std::vector<double> lo(z), hi(z);
    for (std::size_t i = 0; i < z; ++i) {
        lo[i] = -model.gamma(i);
        hi[i] = model.density_max(i) - model.gamma(i);
    }
    auto exact_bracket = [&](const std::vector<double>& phi) {
        double b = 1.0;
        for (const auto& c : model.couplings()) b += c.alpha * phi[c.i] * phi[c.j];
        return b;
    };

    FeasibilityResult result{Feasibility::Feasible, 0.0, {}, 0};
    if (model.couplings().empty()) {
        result.min_bracket = 1.0;
        result.witness = lo;
        result.corners_examined = 1;
        return result;
    }

    if (z <= kExhaustiveCorners) {
        // Gray-code walk; field[i] = sum_j alpha_ij phi_j is kept current so
        // each flip updates the bracket in O(1) and the field in O(zeta).
        std::vector<double> phi = lo;
        std::vector<double> field(z, 0.0);
        for (const auto& c : model.couplings()) {
            field[c.i] += c.alpha * phi[c.j];
            field[c.j] += c.alpha * phi[c.i];
        }
        double b = exact_bracket(phi);
        double best = b;
        std::uint64_t best_code = 0;
        const std::uint64_t corners = std::uint64_t{1} << z;
        for (std::uint64_t step = 1; step < corners; ++step) {
            const auto bit = static_cast<std::size_t>(std::countr_zero(step));
            const std::uint64_t code = step ^ (step >> 1);
            const double next = ((code >> bit) & 1U) ? hi[bit] : lo[bit];
            const double delta = next - phi[bit];
            b += delta * field[bit];
            phi[bit] = next;
            for (std::size_t j = 0; j < z; ++j) field[j] += model.alpha(j, bit) * delta;
            if (b < best) {
                best = b;
                best_code = code;
            }
        }
        std::vector<double> witness(z);
        for (std::size_t i = 0; i < z; ++i) witness[i] = ((best_code >> i) & 1U) ? hi[i] : lo[i];
        result.min_bracket = exact_bracket(witness);
        result.witness = std::move(witness);
        result.corners_examined = corners;
        result.status = result.min_bracket < -kInfeasibleTolerance ? Feasibility::Infeasible : Feasibility::Feasible;
        return result;
    }

    std::mt19937_64 rng(seed);
    std::vector<double> phi(z);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t n = 0; n < kSampledCorners; ++n) {
        for (std::size_t i = 0; i < z; ++i) phi[i] = (rng() >> 63) ? hi[i] : lo[i];
        const double b = exact_bracket(phi);
        if (b < best) {
            best = b;
            result.witness = phi;
        }
    }
    result.min_bracket = best;
    result.corners_examined = kSampledCorners;
    result.status = best < -kInfeasibleTolerance ? Feasibility::Infeasible : Feasibility::Undetermined;
    return result;
}

double joint_pdf(const SarmanovModel& model, std::span<const double> x) {
    const double b = model.bracket(x);
    double prod = 1.0;
    for (std::size_t i = 0; i < model.zeta(); ++i) prod *= model.marginal(i).pdf(x[i]);
    return prod * b;
}

}  // namespace sme
