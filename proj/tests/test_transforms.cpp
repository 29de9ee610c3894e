#include "oracles.hpp"

#include "sme/error.hpp"
#include "sme/transforms.hpp"

#include <doctest.h>

#include <random>

using namespace sme;

TEST_SUITE("transforms") {

TEST_CASE("expected density") {
    CHECK(std::abs(expected_density(MixedErlang(0.9, {0.4, 0.6})) - 0.261) < 5e-4);
    CHECK(std::abs(expected_density(MixedErlang(0.95, {0.8, 0.2})) - 0.3895) < 5e-5);
    CHECK(expected_density(MixedErlang(3.0, {1.0})) == doctest::Approx(1.5).epsilon(1e-15));
    const std::vector<double> q{0.1, 0.3, 0.0, 0.6};
    const double ref = oracle::integrate_to_inf([&](double x) { return std::pow(oracle::me_pdf(1.2, q, x), 2); }, 0.0);
    CHECK(expected_density(MixedErlang(1.2, q)) == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("squared density transform") {
    const auto v = squared_density_transform(MixedErlang(1.5, {1.0}));
    CHECK(v.scale() == 3.0);
    CHECK(v.size() == 1);
    CHECK(v.weights()[0] == doctest::Approx(1.0));

    const std::vector<double> q{0.4, 0.6};
    const MixedErlang d(0.9, q);
    const auto sq = squared_density_transform(d);
    CHECK(sq.size() <= 2 * q.size() - 1);
    CHECK(sq.mass() == doctest::Approx(1.0).epsilon(1e-15));
    const double g = expected_density(d);
    const double ref = oracle::integrate_to_inf([&](double x) { return x * std::pow(oracle::me_pdf(0.9, q, x), 2) / g; }, 0.0);
    CHECK(std::abs(mu_tilde(d) - ref) < 1e-8);
    for (int i = 0; i < 100; ++i) {
        const double x = 0.15 * i;
        CHECK(std::abs(sq.pdf(x) * g - d.pdf(x) * d.pdf(x)) < 1e-10);
    }
}

TEST_CASE("mu tilde") {
    CHECK(mu_tilde(MixedErlang(2.0, {1.0})) == doctest::Approx(0.25));
    const std::vector<double> q{0.45, 0.55};
    const MixedErlang d(2.0, q);
    const double g = expected_density(d);
    const double ref = oracle::integrate_to_inf([&](double x) { return x * std::pow(oracle::me_pdf(2.0, q, x), 2) / g; }, 0.0);
    CHECK(std::abs(mu_tilde(d) - ref) < 1e-8);
    CHECK(mu_tilde(d) == squared_density_transform(d).moments().mean);
}

TEST_CASE("size-biased transform") {
    const auto g1 = size_biased_transform(MixedErlang(1.0, {1.0}));
    CHECK(g1.size() == 2);
    CHECK(g1.weights()[0] == 0.0);
    CHECK(g1.weights()[1] == doctest::Approx(1.0));

    const MixedErlang d(0.9, {0.4, 0.6});
    const auto g = size_biased_transform(d);
    CHECK(g.weights()[0] == 0.0);
    CHECK(g.weights()[1] == doctest::Approx(0.25));
    CHECK(g.weights()[2] == doctest::Approx(0.75));
    CHECK(g.mean() == doctest::Approx(d.raw_moment(2) / d.mean()).epsilon(1e-14));
}

TEST_CASE("rescale") {
    const MixedErlang d(0.9, {0.4, 0.6});
    const auto same = rescale(d, 0.9);
    CHECK(same.size() == 2);
    CHECK(same.weights()[0] == 0.4);
    const auto up = rescale(d, 1.9);
    for (double x : {0.5, 1.0, 2.0, 5.0}) CHECK(std::abs(up.cdf(x) - d.cdf(x)) < 1e-10);
    const auto geo = rescale(MixedErlang(1.0, {1.0}), 2.0);
    for (std::size_t k = 0; k < 20; ++k) CHECK(geo.weights()[k] == doctest::Approx(std::pow(0.5, k + 1)).epsilon(1e-12));
    CHECK_THROWS_AS(rescale(d, 0.5), RescaleDownward);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const MixedErlang r(0.37, {0.1, 0.2, 0.3, 0.4});
    const auto r2 = rescale(r, 2.9);
    for (int i = 0; i < 20; ++i) {
        const double x = 40.0 * u(rng);
        CHECK(std::abs(r2.cdf(x) - r.cdf(x)) < 1e-10);
    }
}

TEST_CASE("convolution") {
    const MixedErlang e(1.3, {1.0});
    const std::vector<MixedErlang> ee{e, e};
    const auto two = convolve(ee);
    CHECK(two.size() == 2);
    CHECK(two.weights()[1] == doctest::Approx(1.0));

    const std::vector<MixedErlang> ab{MixedErlang(1.0, {0.4, 0.6}), MixedErlang(1.0, {0.8, 0.2})};
    const auto c = convolve(ab);
    const std::vector<double> expect{0.0, 0.32, 0.56, 0.12};
    REQUIRE(c.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(c.weights()[i] == doctest::Approx(expect[i]).epsilon(1e-15));
    CHECK(std::abs(c.mean() - ab[0].mean() - ab[1].mean()) < 1e-12);

    const std::vector<MixedErlang> bad{MixedErlang(1.0, {1.0}), MixedErlang(2.0, {1.0})};
    CHECK_THROWS_AS(convolve(bad), ScaleMismatch);
    CHECK_THROWS_AS(convolve(std::vector<MixedErlang>{}), InvalidDistribution);

    // cdf of the sum against numerical convolution of the two densities
    const std::vector<double> qa{0.3, 0.7}, qb{0.6, 0.1, 0.3};
    const std::vector<MixedErlang> pair{MixedErlang(0.8, qa), MixedErlang(0.8, qb)};
    const auto s = convolve(pair);
    for (int i = 1; i <= 10; ++i) {
        const double y = 1.5 * i;
        const double ref = oracle::integrate(
            [&](double x) { return oracle::me_pdf(0.8, qa, x) * pair[1].cdf(y - x); }, 0.0, y, 1e-12);
        CHECK(std::abs(s.cdf(y) - ref) < 1e-6);
    }
}

TEST_CASE("transform chain order matters") {
    const MixedErlang d(0.9, {0.4, 0.6});
    const std::vector<TransformTag> vg{TransformTag::SquaredDensity, TransformTag::SizeBiased};
    const std::vector<TransformTag> gv{TransformTag::SizeBiased, TransformTag::SquaredDensity};
    const auto a = transform_chain(d, vg, 1.8);
    const auto b = transform_chain(d, gv, 1.8);
    CHECK(a.scale() == 1.8);
    CHECK(a.mean() == doctest::Approx(size_biased_transform(squared_density_transform(d)).mean()).epsilon(1e-12));
    CHECK(std::abs(a.mean() - b.mean()) > 1e-3);
}

}  // TEST_SUITE
