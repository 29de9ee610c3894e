#pragma once

#include "sme/mixed_erlang.hpp"
#include "sme/settings.hpp"

#include <span>
#include <vector>

namespace sme {

/// gamma = E[f(X)] = integral of f^2.
double expected_density(const MixedErlang& d);

/// Law with density f^2 / gamma; mixed Erlang at scale 2*beta.
MixedErlang squared_density_transform(const MixedErlang& d);

/// Mean of the squared-density law, E[X f(X)] / gamma.
double mu_tilde(const MixedErlang& d);

/// Size-biased law x f(x) / E[X]; same scale, shapes shifted up by one.
MixedErlang size_biased_transform(const MixedErlang& d);

/// Re-express the law at a finer scale beta2 >= beta (exact up to tail
/// truncation at settings.series_epsilon).
MixedErlang rescale(const MixedErlang& d, double beta2, const NumericSettings& settings = {});

/// Law of the sum of independent mixed Erlangs sharing one scale.
MixedErlang convolve(std::span<const MixedErlang> laws, const NumericSettings& settings = {});

/// Unary transforms that can be chained in front of a rescale.
enum class TransformTag { SquaredDensity, SizeBiased };

/// Apply tags left to right, then rescale to beta2.
MixedErlang transform_chain(const MixedErlang& d, std::span<const TransformTag> tags, double beta2,
                            const NumericSettings& settings = {});

/// Coefficients of shape k+1 at index k for the product out[i+j+1] += a_i b_j,
/// i.e. the weight vector of the independent sum (without truncation).
std::vector<double> convolve_weights(std::span<const double> a, std::span<const double> b);

}  // namespace sme
