#include "sme/error.hpp"
#include "sme/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace sme::kernels {
namespace {

struct Table {
    Backend backend;
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    void (*convolve)(std::span<const double>, std::span<const double>, std::span<double>);
};

constexpr Table kScalar{Backend::Scalar, &scalar::dot, &scalar::axpy, &scalar::convolve};
#if defined(SME_HAVE_AVX2_KERNELS)
constexpr Table kAvx2{Backend::Avx2, &avx2::dot, &avx2::axpy, &avx2::convolve};
#endif

bool cpu_has_avx2() {
#if defined(SME_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* table_for(Backend b) {
#if defined(SME_HAVE_AVX2_KERNELS)
    if (b == Backend::Avx2) return &kAvx2;
#endif
    (void)b;
    return &kScalar;
}

const Table* initial_table() {
    if (const char* env = std::getenv("SME_KERNELS")) {
        const std::string choice(env);
        if (choice == "scalar") return &kScalar;
        if (choice == "avx2" && cpu_has_avx2()) return table_for(Backend::Avx2);
    }
    return cpu_has_avx2() ? table_for(Backend::Avx2) : &kScalar;
}

std::atomic<const Table*>& active() {
    static std::atomic<const Table*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool avx2_available() {
    static const bool available = cpu_has_avx2();
    return available;
}

Backend active_backend() {
    return active().load(std::memory_order_acquire)->backend;
}

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available()) {
        throw Error("AVX2 kernels are not available on this machine");
    }
    active().store(table_for(b), std::memory_order_release);
}

double dot(std::span<const double> x, std::span<const double> y) {
    return active().load(std::memory_order_relaxed)->dot(x, y);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().load(std::memory_order_relaxed)->axpy(a, x, y);
}

void convolve(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    active().load(std::memory_order_relaxed)->convolve(a, b, out);
}

}  // namespace sme::kernels
