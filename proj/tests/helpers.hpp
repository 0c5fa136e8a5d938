#pragma once

#include "tssd/dataset.hpp"
#include "tssd/rng.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline tssd::Sample make_sample(std::size_t id, std::vector<double> features, std::vector<double> logits,
                                std::size_t noisy, std::optional<std::size_t> truth = std::nullopt) {
    tssd::Sample s;
    s.id = id;
    s.features = std::move(features);
    s.logits = std::move(logits);
    s.noisy_label = noisy;
    s.true_label = truth;
    return s;
}

inline std::vector<double> uniform_vector(tssd::Rng& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("tssd_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / scale;
}

}  // namespace testing
