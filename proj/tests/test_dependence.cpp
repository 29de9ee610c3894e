#include "oracles.hpp"

#include "sme/dependence.hpp"
#include "sme/error.hpp"
#include "sme/mc_oracle.hpp"
#include "sme/transforms.hpp"

#include <doctest.h>

#include <cmath>

using namespace sme;

namespace {

const MixedErlang kD1(2.0, {0.45, 0.55});
const MixedErlang kD2(2.5, {0.5, 0.5});
const std::vector<double> kQ1{0.45, 0.55}, kQ2{0.5, 0.5};

KernelCase kernel(KernelKind k) {
    KernelCase kc;
    kc.kind = k;
    if (k == KernelKind::LinearTruncated) kc.t1 = kc.t2 = 15.0;
    return kc;
}

double sd(const std::vector<double>& q, double beta) {
    const double m1 = oracle::integrate_to_inf([&](double x) { return x * oracle::me_pdf(beta, q, x); }, 0.0);
    const double m2 = oracle::integrate_to_inf([&](double x) { return x * x * oracle::me_pdf(beta, q, x); }, 0.0);
    return std::sqrt(m2 - m1 * m1);
}

}  // namespace

TEST_SUITE("dependence") {

TEST_CASE("density kernel") {
    const auto kc = kernel(KernelKind::Density);
    CHECK(pearson_rho(kc, kD1, kD2, 0.0) == 0.0);
    const auto b = rho_bounds(kc, kD1, kD2);
    CHECK(b.alpha_min == doctest::Approx(-2.1289).epsilon(2e-5));
    CHECK(b.rho_min == doctest::Approx(-0.2005).epsilon(3e-4));
    // the upper bound uses sup f_1, an interior maximum for this marginal
    const double m1 = kD1.pdf_max(), m2 = kD2.pdf_max();
    const double g1 = expected_density(kD1), g2 = expected_density(kD2);
    CHECK(b.alpha_max == doctest::Approx(1.0 / std::max(g1 * (m2 - g2), (m1 - g1) * g2)).epsilon(1e-12));
    // the correlation itself agrees with the tabulated value at alpha = 3.21
    CHECK(std::abs(pearson_rho(kc, kD1, kD2, 3.21) - 0.3023) < 1e-4);

    // E[X phi(X)] by quadrature
    auto cross = [](const std::vector<double>& q, double beta, double g) {
        return oracle::integrate_to_inf(
            [&](double x) { return x * oracle::me_pdf(beta, q, x) * (oracle::me_pdf(beta, q, x) - g); }, 0.0);
    };
    const double ref = 1.5 * cross(kQ1, 2.0, g1) * cross(kQ2, 2.5, g2) / (sd(kQ1, 2.0) * sd(kQ2, 2.5));
    CHECK(pearson_rho(kc, kD1, kD2, 1.5) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("exponential kernel") {
    const auto kc = kernel(KernelKind::Exponential);
    const auto b = rho_bounds(kc, kD1, kD2);
    CHECK(std::abs(b.alpha_max - 3.5854) < 5e-5);
    CHECK(std::abs(b.rho_max - 0.1921) < 5e-5);
    CHECK(std::abs(b.alpha_min + 3.0) < 5e-5);
    CHECK(std::abs(b.rho_min + 0.1607) < 5e-5);

    auto moments = [](const std::vector<double>& q, double beta) {
        const double ge = oracle::integrate_to_inf([&](double x) { return std::exp(-x) * oracle::me_pdf(beta, q, x); }, 0.0);
        const double xe =
            oracle::integrate_to_inf([&](double x) { return x * std::exp(-x) * oracle::me_pdf(beta, q, x); }, 0.0);
        const double m = oracle::integrate_to_inf([&](double x) { return x * oracle::me_pdf(beta, q, x); }, 0.0);
        return xe - ge * m;
    };
    const double ref = moments(kQ1, 2.0) * moments(kQ2, 2.5) / (sd(kQ1, 2.0) * sd(kQ2, 2.5));
    CHECK(pearson_rho(kc, kD1, kD2, 1.0) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("linear truncated kernel") {
    auto kc = kernel(KernelKind::LinearTruncated);
    const auto b = rho_bounds(kc, kD1, kD2);
    CHECK(std::abs(b.alpha_max - 0.0896) < 5e-5);
    CHECK(std::abs(b.rho_max - 0.0318) < 5e-5);
    CHECK(std::abs(b.alpha_min + 0.0049) < 5e-5);
    CHECK(std::abs(b.rho_min + 0.0017) < 5e-5);
    CHECK(kernel_warnings(kc, kD1, kD2).empty());
    kc.t1 = 1.0;
    CHECK(kernel_warnings(kc, kD1, kD2).size() == 1);

    // truncated moments against quadrature over [0, T]
    kc = kernel(KernelKind::LinearTruncated);
    kc.truncated_moments = true;
    kc.t1 = kc.t2 = 1.2;
    auto trunc = [](const std::vector<double>& q, double beta, double t) {
        const double mass = oracle::me_cdf(beta, q, t);
        const double m1 = oracle::integrate([&](double x) { return x * oracle::me_pdf(beta, q, x); }, 0.0, t) / mass;
        const double m2 = oracle::integrate([&](double x) { return x * x * oracle::me_pdf(beta, q, x); }, 0.0, t) / mass;
        return std::pair{m1, std::sqrt(m2 - m1 * m1)};
    };
    const auto [mu1, s1] = trunc(kQ1, 2.0, 1.2);
    const auto [mu2, s2] = trunc(kQ2, 2.5, 1.2);
    const auto tb = rho_bounds(kc, kD1, kD2);
    CHECK(tb.alpha_max == doctest::Approx(1.0 / std::max(mu1 * (1.2 - mu2), (1.2 - mu1) * mu2)).epsilon(1e-10));
    CHECK(tb.rho_max == doctest::Approx(tb.alpha_max * s1 * s2).epsilon(1e-10));
    kc.t1 = 0.0;
    CHECK_THROWS_AS(rho_bounds(kc, kD1, kD2), DomainError);
}

TEST_CASE("fgm kernel") {
    const auto kc = kernel(KernelKind::Fgm);
    const auto b = rho_bounds(kc, kD1, kD2);
    CHECK(b.alpha_max == 1.0);
    CHECK(b.alpha_min == -1.0);
    CHECK(std::abs(b.rho_max - 0.2711) < 5e-5);
    CHECK(b.rho_min == doctest::Approx(-b.rho_max));

    auto cross = [](const std::vector<double>& q, double beta) {
        return oracle::integrate_to_inf(
            [&](double x) { return x * oracle::me_pdf(beta, q, x) * (1.0 - 2.0 * oracle::me_cdf(beta, q, x)); }, 0.0,
            1e-11);
    };
    const double ref = 0.6 * cross(kQ1, 2.0) * cross(kQ2, 2.5) / (sd(kQ1, 2.0) * sd(kQ2, 2.5));
    CHECK(pearson_rho(kc, kD1, kD2, 0.6) == doctest::Approx(ref).epsilon(1e-8));

    const double emf = oracle::integrate_to_inf(
        [&](double x) { return x * oracle::me_cdf(2.0, kQ1, x) * oracle::me_pdf(2.0, kQ1, x); }, 0.0, 1e-11);
    CHECK(mean_times_cdf(kD1) == doctest::Approx(emf).epsilon(1e-9));
    // uniform-like limit does not apply; exponential marginals give rho = alpha / 4
    const auto e = MixedErlang::exponential(3.0);
    CHECK(pearson_rho(kc, e, e, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("bounds are consistent") {
    for (auto k : {KernelKind::Density, KernelKind::Exponential, KernelKind::LinearTruncated, KernelKind::Fgm}) {
        CAPTURE(kernel_name(k));
        const auto kc = kernel(k);
        const auto b = rho_bounds(kc, kD1, kD2);
        CHECK(b.alpha_min < 0.0);
        CHECK(b.alpha_max > 0.0);
        CHECK(pearson_rho(kc, kD1, kD2, b.alpha_max) == doctest::Approx(b.rho_max));
        CHECK(pearson_rho(kc, kD1, kD2, b.alpha_min) == doctest::Approx(b.rho_min));
        const double r1 = pearson_rho(kc, kD1, kD2, 0.3 * b.alpha_max);
        CHECK(pearson_rho(kc, kD1, kD2, 0.6 * b.alpha_max) == doctest::Approx(2.0 * r1).epsilon(1e-12));
        CHECK(r1 > 0.0);
        CHECK_THROWS_AS(pearson_rho(kc, kD1, kD2, b.alpha_max * 1.01), OutOfBounds);
        CHECK_THROWS_AS(pearson_rho(kc, kD1, kD2, b.alpha_min * 1.01), OutOfBounds);
        CHECK(parse_kernel_kind(kernel_name(k)) == k);
    }
    CHECK(parse_kernel_kind("3") == KernelKind::LinearTruncated);
    CHECK_THROWS_AS(parse_kernel_kind("copula"), ParseError);
}

TEST_CASE("density kernel correlation against samples") {
    const double alpha = 1.0;
    const SarmanovModel m({{kD1, kD2}}, {{{0, 0}, {0, 1}, alpha}});
    OracleConfig cfg;
    cfg.sample_count = 600'000;
    cfg.seed = 7;
    const auto draws = sample(m, cfg);
    // correlation per batch, then batch-means error
    const std::size_t per = draws.rows() / cfg.batches;
    std::vector<double> rho(cfg.batches);
    for (std::size_t b = 0; b < cfg.batches; ++b) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
            const double x = draws.row(i)[0], y = draws.row(i)[1];
            sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
        }
        const double n = static_cast<double>(per);
        const double cov = sxy / n - sx * sy / (n * n);
        rho[b] = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
    }
    double mean = 0, var = 0;
    for (double r : rho) mean += r / rho.size();
    for (double r : rho) var += (r - mean) * (r - mean) / (rho.size() - 1);
    const double se = std::sqrt(var / rho.size());
    CHECK(std::abs(mean - pearson_rho(kernel(KernelKind::Density), kD1, kD2, alpha)) < 3.0 * se + 1e-3);
}

TEST_CASE("sweeps") {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.25 * i);
    const auto fgm = beta_sweep(kernel(KernelKind::Fgm), kQ1, kQ2, grid);
    for (const auto& r : fgm) CHECK(r.bounds.rho_max == doctest::Approx(fgm.front().bounds.rho_max).epsilon(1e-12));
    const auto dens = beta_sweep(kernel(KernelKind::Density), kQ1, kQ2, grid);
    for (std::size_t i = 1; i < dens.size(); ++i) CHECK(dens[i].bounds.rho_max >= dens[i - 1].bounds.rho_max - 1e-9);
    auto lin = kernel(KernelKind::LinearTruncated);
    lin.truncated_moments = true;
    const auto trunc = beta_sweep(lin, kQ1, kQ2, grid);
    for (std::size_t i = 1; i < trunc.size(); ++i) CHECK(trunc[i].bounds.rho_max < trunc[i - 1].bounds.rho_max);
    CHECK(dens.size() == grid.size());
    CHECK(dens[7].beta == 2.0);
}

}  // TEST_SUITE
