#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace tssd {

using ClassId = std::size_t;
using SampleId = std::size_t;

struct Sample {
    SampleId id = 0;
    std::vector<double> features;  // length D
    std::vector<double> logits;    // length K
    ClassId noisy_label = 0;
    std::optional<ClassId> true_label;
};

/// Ordered, validated collection of samples. Ids are 0..N-1 in order.
class Dataset {
public:
    Dataset(std::size_t num_classes, std::size_t feature_dim, std::vector<Sample> samples);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t feature_dim() const { return feature_dim_; }

    const Sample& operator[](SampleId id) const { return samples_[id]; }
    const std::vector<Sample>& samples() const { return samples_; }

    bool has_truth() const;

    /// Per-id flag noisy_label == true_label; empty when any true label is absent.
    std::optional<std::vector<bool>> clean_mask() const;

    /// Fraction of samples whose noisy label differs from the true label.
    double flip_fraction() const;

    /// Copy with the given rows, renumbered 0..M-1 in the order given.
    Dataset subset(const std::vector<SampleId>& ids) const;

    /// Copy with noisy labels replaced (same length as size()).
    Dataset with_noisy_labels(const std::vector<ClassId>& labels) const;

private:
    std::size_t num_classes_;
    std::size_t feature_dim_;
    std::vector<Sample> samples_;
};

struct NoisyCluster {
    ClassId class_id = 0;
    std::vector<SampleId> member_ids;
};

enum class NoiseKind { Symmetric, Asymmetric };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Symmetric;
    double rate = 0.0;
    std::uint64_t seed = 0;
};

struct SyntheticSpec {
    std::size_t num_classes = 10;
    std::size_t feature_dim = 16;
    std::size_t num_samples = 5000;
    double cluster_spread = 0.3;
    double logit_sharpness = 5.0;
    double logit_jitter = 0.1;
    std::uint64_t seed = 0;
};

Dataset load_sample_table(const std::filesystem::path& path);
Dataset read_sample_table(std::istream& in);
void write_sample_table(const Dataset& dataset, std::ostream& out);
void save_sample_table(const Dataset& dataset, const std::filesystem::path& path);

Dataset generate_synthetic(const SyntheticSpec& spec);
Dataset inject_noise(const Dataset& dataset, const NoiseSpec& spec);

/// K clusters keyed by noisy label, members in ascending id order.
std::vector<NoisyCluster> partition_by_label(const Dataset& dataset);

/// Deterministic train/test carve: a seeded shuffle puts round(fraction*N) ids in the test part.
struct Split {
    std::vector<SampleId> train;
    std::vector<SampleId> test;
};
Split holdout_split(std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace tssd
