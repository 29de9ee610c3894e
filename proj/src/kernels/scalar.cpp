#include "sme/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace sme::kernels::scalar {

double dot(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i] * y[i];
    }
    return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += a * x[i];
    }
}

void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        axpy(a[i], b, out.subspan(i, b.size()));
    }
}

}  // namespace sme::kernels::scalar
