#include "helpers.hpp"

#include "tssd/error.hpp"
#include "tssd/gmm.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

using namespace tssd;

namespace {

std::vector<double> mixture_draws(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> a(0.0, 0.1), b(2.0, 0.3);
    std::vector<double> v(n);
    for (double& x : v) x = coin(rng) ? a(rng) : b(rng);
    return v;
}

double normal_pdf(double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

Gmm1d hand_mixture() {
    Gmm1d g;
    g.weights = {0.5, 0.5};
    g.means = {0.0, 4.0};
    g.variances = {1.0, 1.0};
    g.clean_component = 0;
    return g;
}

}  // namespace

TEST_CASE("EM recovers a known two-component mixture") {
    const auto values = mixture_draws(2000, 20240601);
    const auto t0 = std::chrono::steady_clock::now();
    const Gmm1d g = fit_gmm1d(values, GmmConfig{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int lo = g.means[0] < g.means[1] ? 0 : 1;
    CHECK(std::abs(g.means[lo] - 0.0) <= 0.05);
    CHECK(std::abs(g.means[1 - lo] - 2.0) <= 0.05);
    CHECK(std::abs(g.weights[lo] - 0.5) <= 0.05);
    CHECK(std::abs(g.weights[1 - lo] - 0.5) <= 0.05);
    CHECK(g.clean_component == lo);
    CHECK(g.weights[0] + g.weights[1] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 1; i < g.log_likelihood.size(); ++i)
        CHECK(g.log_likelihood[i] >= g.log_likelihood[i - 1] - 1e-9);
    CHECK(g.log_likelihood.back() == doctest::Approx(log_likelihood(g, values)).epsilon(1e-9));
    CHECK(secs < 1.0);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(fit_gmm1d(std::vector<double>(20, 0.3), GmmConfig{}), DegenerateFit);
    CHECK_THROWS_AS(fit_gmm1d(std::vector<double>{1, 2, 3}, GmmConfig{}), DegenerateFit);
    GmmConfig bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(fit_gmm1d(mixture_draws(50, 1), bad), InvalidSpec);
    bad = {};
    bad.max_iter = 0;
    CHECK_THROWS_AS(fit_gmm1d(mixture_draws(50, 1), bad), InvalidSpec);
    std::vector<double> with_nan = mixture_draws(20, 2);
    with_nan[3] = std::nan("");
    CHECK_THROWS_AS(fit_gmm1d(with_nan, GmmConfig{}), ContractViolation);
}

TEST_CASE("orientation picks the clean component") {
    const auto values = mixture_draws(500, 3);
    GmmConfig cfg;
    cfg.orientation = Orientation::LargerMeanClean;
    const Gmm1d g = fit_gmm1d(values, cfg);
    const int hi = g.means[0] > g.means[1] ? 0 : 1;
    CHECK(g.clean_component == hi);
}

TEST_CASE("posterior on a hand mixture") {
    const Gmm1d g = hand_mixture();
    CHECK(posterior(g, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    const double p0 = normal_pdf(0.0, 0.0, 1.0), p1 = normal_pdf(0.0, 4.0, 1.0);
    const double oracle = p0 / (p0 + p1);
    CHECK(oracle == doctest::Approx(0.99966465).epsilon(1e-7));
    CHECK(posterior(g, 0.0) == doctest::Approx(oracle).epsilon(1e-12));
    double prev = posterior(g, 0.0);
    for (double x = -0.5; x > -60.0; x -= 0.5) {
        const double p = posterior(g, x);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK(prev == doctest::Approx(1.0));
    CHECK_THROWS_AS(posterior(g, std::numeric_limits<double>::infinity()), ContractViolation);
}

TEST_CASE("posterior stays monotone beyond the clean mean with a wide noisy component") {
    Gmm1d g;
    g.weights = {0.5, 0.5};
    g.means = {0.05, 4.0};
    g.variances = {0.0025, 9.0};
    g.clean_component = 0;
    double prev = posterior(g, 0.05);
    for (double x = 0.0; x > -5.0; x -= 0.05) {
        const double p = posterior(g, x);
        CHECK(p >= prev - 1e-15);
        prev = p;
    }
}

TEST_CASE("bimodality check") {
    Gmm1d g = hand_mixture();
    CHECK(is_bimodal(g));
    g.means = {0.0, 1.5};
    CHECK_FALSE(is_bimodal(g));
    CHECK(g.stddev(0) == 1.0);
}
