#include "tssd/gmm.hpp"

#include "tssd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tssd {

namespace {

double log_normal(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

double log_add(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double nearest_rank(const std::vector<double>& sorted, double p) {
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(p * n)) - 1;
    rank = std::clamp<std::ptrdiff_t>(rank, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
    return sorted[static_cast<std::size_t>(rank)];
}

}  // namespace

double Gmm1d::stddev(int c) const { return std::sqrt(variances[static_cast<std::size_t>(c)]); }

double log_likelihood(const Gmm1d& gmm, std::span<const double> values) {
    double ll = 0.0;
    for (double x : values) {
        ll += log_add(std::log(gmm.weights[0]) + log_normal(x, gmm.means[0], gmm.variances[0]),
                      std::log(gmm.weights[1]) + log_normal(x, gmm.means[1], gmm.variances[1]));
    }
    return ll;
}

Gmm1d fit_gmm1d(std::span<const double> values, const GmmConfig& config) {
    if (config.max_iter < 1) throw InvalidSpec("max_iter must be >= 1");
    if (!(config.tol > 0.0)) throw InvalidSpec("tol must be positive");
    if (!(config.variance_floor > 0.0)) throw InvalidSpec("variance_floor must be positive");
    if (values.size() < std::max<std::size_t>(config.min_fit_size, 2))
        throw DegenerateFit("need at least " + std::to_string(std::max<std::size_t>(config.min_fit_size, 2)) +
                            " values, got " + std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v)) throw ContractViolation("non-finite value in GMM input");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw DegenerateFit("all values identical");

    const auto n = static_cast<double>(sorted.size());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    var = std::max(var / n, config.variance_floor);

    Gmm1d gmm;
    gmm.means = {nearest_rank(sorted, 0.10), nearest_rank(sorted, 0.90)};
    if (gmm.means[0] == gmm.means[1]) gmm.means = {sorted.front(), sorted.back()};
    gmm.variances = {var, var};
    gmm.weights = {0.5, 0.5};

    // Iterate over the sorted copy so the fit does not depend on input order.
    double ll = log_likelihood(gmm, sorted);
    gmm.log_likelihood.push_back(ll);

    std::vector<double> resp(sorted.size());
    for (std::size_t it = 0; it < config.max_iter; ++it) {
        const double lw0 = std::log(gmm.weights[0]);
        const double lw1 = std::log(gmm.weights[1]);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double a = lw0 + log_normal(sorted[i], gmm.means[0], gmm.variances[0]);
            const double b = lw1 + log_normal(sorted[i], gmm.means[1], gmm.variances[1]);
            resp[i] = std::exp(a - log_add(a, b));
        }

        double n0 = 0.0, n1 = 0.0, s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            n0 += resp[i];
            n1 += 1.0 - resp[i];
            s0 += resp[i] * sorted[i];
            s1 += (1.0 - resp[i]) * sorted[i];
        }
        // A component that lost all mass cannot be re-estimated; keep the last state.
        if (n0 < 1e-10 || n1 < 1e-10) break;

        Gmm1d next = gmm;
        next.means = {s0 / n0, s1 / n1};
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double d0 = sorted[i] - next.means[0];
            const double d1 = sorted[i] - next.means[1];
            v0 += resp[i] * d0 * d0;
            v1 += (1.0 - resp[i]) * d1 * d1;
        }
        next.variances = {std::max(v0 / n0, config.variance_floor),
                          std::max(v1 / n1, config.variance_floor)};
        next.weights = {n0 / n, n1 / n};

        const double next_ll = log_likelihood(next, sorted);
        gmm = std::move(next);
        gmm.log_likelihood.push_back(next_ll);
        gmm.iterations = it + 1;
        const bool done = std::abs(next_ll - ll) < config.tol * std::abs(ll);
        ll = next_ll;
        if (done) {
            gmm.converged = true;
            break;
        }
    }

    const bool first_smaller = gmm.means[0] <= gmm.means[1];
    if (config.orientation == Orientation::SmallerMeanClean)
        gmm.clean_component = first_smaller ? 0 : 1;
    else
        gmm.clean_component = first_smaller ? 1 : 0;
    return gmm;
}

double component_posterior(const Gmm1d& gmm, int component, double value) {
    if (!std::isfinite(value)) throw ContractViolation("non-finite value passed to posterior");
    const double a = std::log(gmm.weights[0]) + log_normal(value, gmm.means[0], gmm.variances[0]);
    const double b = std::log(gmm.weights[1]) + log_normal(value, gmm.means[1], gmm.variances[1]);
    const double own = component == 0 ? a : b;
    const double other = component == 0 ? b : a;
    // 1 / (1 + exp(other - own)), evaluated without overflow.
    const double d = other - own;
    if (d > 0) {
        const double e = std::exp(-d);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(d));
}

double posterior(const Gmm1d& gmm, double value) {
    const int c = gmm.clean_component;
    const double raw = component_posterior(gmm, c, value);
    const double clean_mean = gmm.means[static_cast<std::size_t>(c)];
    const double other_mean = gmm.means[static_cast<std::size_t>(1 - c)];
    const bool clean_side = clean_mean <= other_mean ? value < clean_mean : value > clean_mean;
    if (!clean_side) return raw;
    return std::max(raw, component_posterior(gmm, c, clean_mean));
}

bool is_bimodal(const Gmm1d& gmm) {
    return std::abs(gmm.means[0] - gmm.means[1]) > 2.0 * std::max(gmm.stddev(0), gmm.stddev(1));
}

}  // namespace tssd
