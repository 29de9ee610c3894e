#pragma once

// Data-parallel inner loops shared by the distribution code. Every kernel has
// a scalar reference implementation; an AVX2/FMA variant is compiled on x86-64
// and selected at runtime when the CPU supports it. The SME_KERNELS
// environment variable ("scalar" or "avx2") overrides the automatic choice.

#include <span>
#include <string_view>

namespace sme::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);

/// True when the AVX2 kernels were compiled in and the CPU can run them.
bool avx2_available();

Backend active_backend();

/// Switch the dispatch table. Throws sme::Error if the backend is unavailable.
void set_backend(Backend b);

/// sum_i x[i] * y[i]; the spans must have equal length.
double dot(std::span<const double> x, std::span<const double> y);

/// y[i] += a * x[i]; the spans must have equal length.
void axpy(double a, std::span<const double> x, std::span<double> y);

/// Full linear convolution: out[n] = sum_i a[i] * b[n - i].
/// out.size() must equal a.size() + b.size() - 1.
void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out);

namespace scalar {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out);
}  // namespace scalar

#if defined(SME_HAVE_AVX2_KERNELS)
namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace sme::kernels
