#pragma once

#include "sme/mixed_erlang.hpp"

#include <string>
#include <vector>

namespace sme {

enum class KernelKind {
    Density,          // phi(x) = f(x) - E[f(X)]
    Exponential,      // phi(x) = e^{-x} - E[e^{-X}]
    LinearTruncated,  // phi(x) = x - mu on [0, T]
    Fgm,              // phi(x) = 1 - 2 F(x)
};

struct KernelCase {
    KernelKind kind = KernelKind::Density;
    double t1 = 0.0;  // truncation points, LinearTruncated only
    double t2 = 0.0;
    /// LinearTruncated: use moments of the laws truncated to [0, T] instead of
    /// the untruncated ones.
    bool truncated_moments = false;
};

struct RhoBounds {
    double alpha_min;
    double alpha_max;
    double rho_min;
    double rho_max;
};

/// Pearson correlation of a bivariate Sarmanov pair with the given kernel:
/// alpha * E[X1 phi1(X1)] E[X2 phi2(X2)] / (sigma1 sigma2).
/// Throws OutOfBounds if alpha is outside the admissible range.
double pearson_rho(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2, double alpha);

RhoBounds rho_bounds(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2);

/// Non-fatal diagnostics (e.g. truncation points inside the bulk of a marginal).
std::vector<std::string> kernel_warnings(const KernelCase& kc, const MixedErlang& d1, const MixedErlang& d2);

struct SweepRow {
    double beta;
    RhoBounds bounds;
};

/// Bounds with both marginals at a common scale beta, for each beta in grid.
std::vector<SweepRow> beta_sweep(const KernelCase& kc, const std::vector<double>& q1, const std::vector<double>& q2,
                                 const std::vector<double>& grid);

/// E[X F(X)] for X with law d, in closed form.
double mean_times_cdf(const MixedErlang& d);

std::string kernel_name(KernelKind k);
/// Parses "density", "exponential", "linear", "fgm" (and "1".."4").
KernelKind parse_kernel_kind(const std::string& s);

}  // namespace sme
