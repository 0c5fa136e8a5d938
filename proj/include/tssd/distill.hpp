#pragma once

#include "tssd/gmm.hpp"
#include "tssd/msp.hpp"
#include "tssd/psd.hpp"
#include "tssd/scoring.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tssd {

/// Settings for one pass of division followed by purification.
struct SelectionConfig {
    GmmConfig gmm;
    ThresholdStrategy t1 = ThresholdStrategy::fixed(0.5);  // loss space
    ThresholdStrategy t2 = ThresholdStrategy::fixed(0.5);  // feature space
    ThresholdStrategy t3 = ThresholdStrategy::fixed(0.5);  // purified clean cutoff
    ThresholdStrategy t4 = ThresholdStrategy::fixed(0.5);  // purified noisy cutoff
    MetaTrainConfig meta;
};

struct SelectionOutcome {
    Partition partition;  // purified
    std::vector<ClassFit> fits;
    std::optional<MetaNet> meta_net;  // empty when the fallback fusion was used
    std::vector<std::string> fallbacks;
    double t3 = 0.5;
    double t4 = 0.5;
};

/// Posteriors, division, meta training, fusion and purification on a scored table.
/// The table gains posteriors and fused scores. A starved meta set falls back to the
/// equal-weight average and is reported in `fallbacks`.
SelectionOutcome select_samples(ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                                const SelectionConfig& config);

}  // namespace tssd
