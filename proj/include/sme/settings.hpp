#pragma once

#include <cstddef>

namespace sme {

/// Numerical knobs shared by the transforms and the root finders.
struct NumericSettings {
    /// Maximum tail mass discarded when an infinite weight vector is truncated.
    double series_epsilon = 1e-12;
    /// Hard cap on the length of any stored weight vector.
    std::size_t max_terms = 20000;
    /// Absolute tolerance on x for quantile bisection.
    double quantile_tolerance = 1e-10;
    /// Absolute tolerance on y for the reinsured VaR bisection.
    double reinsured_tolerance = 1e-8;
};

inline constexpr double kNormalizationTolerance = 1e-9;

}  // namespace sme
