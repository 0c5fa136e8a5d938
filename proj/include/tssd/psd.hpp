#pragma once

#include "tssd/dataset.hpp"
#include "tssd/gmm.hpp"
#include "tssd/scoring.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tssd {

// Parallel sample division: per noisy cluster, fit one mixture in loss space and one in
// feature space, threshold both posteriors, and keep only the samples on which the two
// spaces agree. Everything else is uncertain.

/// Sample sets produced by division and, later, purification. All lists are sorted ids.
struct Partition {
    std::size_t num_samples = 0;
    std::vector<SampleId> positive;   // both spaces say clean
    std::vector<SampleId> negative;   // both spaces say noisy
    std::vector<SampleId> uncertain;  // disagreement or unscorable

    bool purified = false;
    std::vector<SampleId> clean_from_uncertain;  // C_u
    std::vector<SampleId> noisy_from_uncertain;  // U_u
    std::vector<SampleId> dropped;               // strictly between t4 and t3

    std::vector<SampleId> certain() const;
    std::vector<SampleId> clean() const;  // positive + clean_from_uncertain
    std::vector<SampleId> noisy() const;  // negative + noisy_from_uncertain
};

struct ThresholdStrategy {
    enum class Kind { Fixed, NoiseRate, Percentile };
    Kind kind = Kind::Fixed;
    double value = 0.5;

    static ThresholdStrategy fixed(double t) { return {Kind::Fixed, t}; }
    static ThresholdStrategy noise_rate(double p) { return {Kind::NoiseRate, p}; }
    static ThresholdStrategy percentile(double p) { return {Kind::Percentile, p}; }

    /// Parses "fixed:0.5", "noise_rate:0.4" or "percentile:0.36".
    static ThresholdStrategy parse(std::string_view text);
    std::string to_string() const;
};

/// Cutoff for the strategy. Percentile uses nearest rank: sorted[ceil(p n) - 1].
double resolve_threshold(const ThresholdStrategy& strategy, const std::vector<double>& posteriors);

struct ClusterDivision {
    std::vector<std::size_t> positive;
    std::vector<std::size_t> negative;
    std::vector<std::size_t> uncertain;
};

/// Indices into `scores` (pairs of loss/feature posteriors). Positive needs both strictly
/// above their threshold, negative needs both at or below.
ClusterDivision divide_cluster(const std::vector<std::pair<double, double>>& scores, double t1,
                               double t2);

/// Outcome of the per-class mixture fits.
struct ClassFit {
    ClassId class_id = 0;
    std::optional<Gmm1d> loss_fit;
    std::optional<Gmm1d> sim_fit;
    bool degenerate() const { return !loss_fit || !sim_fit; }
};

/// Fits both mixtures per cluster and writes posteriors into the table. Members of a
/// class whose fit is degenerate keep unset posteriors.
std::vector<ClassFit> assign_posteriors(ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                                        const GmmConfig& config);

/// Thresholds resolved per class, then the per-class divisions are unioned.
Partition divide_dataset(const ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                         const ThresholdStrategy& loss_strategy,
                         const ThresholdStrategy& feature_strategy);

enum class Space { Loss, Feature };

/// Ids whose posterior in one space exceeds the per-class threshold (single-space selection).
std::vector<SampleId> single_space_selection(const ScoreTable& table,
                                             const std::vector<NoisyCluster>& clusters,
                                             const ThresholdStrategy& strategy, Space space);

/// Tag per id: P, N, U before purification; P, N, C, UN, DROPPED after.
std::vector<std::string> partition_tags(const Partition& partition);

/// Newline-delimited `id,tag` in id order.
void write_partition(const Partition& partition, std::ostream& out);

/// Reads an `id,tag` file back as (id, tag) pairs in file order.
std::vector<std::pair<SampleId, std::string>> read_partition_tags(std::istream& in);

}  // namespace tssd
