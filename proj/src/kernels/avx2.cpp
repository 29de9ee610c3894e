// Compiled with -mavx2 -mfma; only reached through the dispatcher after a
// runtime CPU check.
#include "sme/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cstddef>

namespace sme::kernels::avx2 {

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    const double* py = y.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc0);
    __m128d hi = _mm256_extractf128_pd(acc0, 1);
    lo = _mm_add_pd(lo, hi);
    lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
    double acc = _mm_cvtsd_f64(lo);
    for (; i < n; ++i) {
        acc += px[i] * py[i];
    }
    return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    double* py = y.data();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(py + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), vy);
        _mm256_storeu_pd(py + i, vy);
    }
    for (; i < n; ++i) {
        py[i] += a * px[i];
    }
}

void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    // Broadcast the shorter operand so the vector loop runs over the longer one.
    if (a.size() > b.size()) std::swap(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        axpy(a[i], b, out.subspan(i, b.size()));
    }
}

}  // namespace sme::kernels::avx2
