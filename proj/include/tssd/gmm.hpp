#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tssd {

/// Which component counts as "clean": small loss is clean, large similarity is clean.
enum class Orientation { SmallerMeanClean, LargerMeanClean };

struct GmmConfig {
    std::size_t max_iter = 100;
    double tol = 1e-6;  // relative change of the log-likelihood
    double variance_floor = 1e-6;
    std::size_t min_fit_size = 8;
    Orientation orientation = Orientation::SmallerMeanClean;
    std::uint64_t seed = 0;  // reserved; initialization is deterministic
};

/// Two-component 1D Gaussian mixture.
struct Gmm1d {
    std::array<double, 2> weights{0.5, 0.5};
    std::array<double, 2> means{0.0, 0.0};
    std::array<double, 2> variances{1.0, 1.0};
    int clean_component = 0;
    bool converged = false;
    std::size_t iterations = 0;
    /// Log-likelihood after initialization and after every EM iteration.
    std::vector<double> log_likelihood;

    double stddev(int c) const;
};

/// EM fit with percentile initialization (10th / 90th). Throws DegenerateFit for
/// fewer than min_fit_size values or a constant list.
Gmm1d fit_gmm1d(std::span<const double> values, const GmmConfig& config);

/// Responsibility of component c for value, computed in the log domain.
double component_posterior(const Gmm1d& gmm, int component, double value);

/// Posterior of the clean component. Beyond the clean mean (on the clean side) the
/// result never drops below the posterior at the mean, so a more extreme clean-side
/// value cannot look less clean when the noisy component is wider.
double posterior(const Gmm1d& gmm, double value);

/// Total log-likelihood of values under the mixture.
double log_likelihood(const Gmm1d& gmm, std::span<const double> values);

/// |mu0 - mu1| > 2 max(sigma0, sigma1).
bool is_bimodal(const Gmm1d& gmm);

}  // namespace tssd
