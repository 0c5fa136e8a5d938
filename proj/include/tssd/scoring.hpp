#pragma once

#include "tssd/dataset.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tssd {

/// Per-sample scores in loss space and feature space plus the posteriors derived from them.
struct ScoreRecord {
    double loss_score = 0.0;  // cross-entropy against the noisy label, >= 0
    double sim_score = 0.0;   // cosine similarity to the noisy-class center, in [-1, 1]
    bool sim_scored = true;   // false when the class had no usable center
    std::optional<double> posterior_loss;
    std::optional<double> posterior_sim;
    std::optional<double> fused;
};

using ScoreTable = std::vector<ScoreRecord>;

struct ClassCenter {
    ClassId class_id = 0;
    std::vector<double> center;
};

/// -log softmax(logits)[label], stabilized by subtracting the max logit.
double cross_entropy_score(std::span<const double> logits, ClassId label);

/// Arithmetic mean of the member vectors. Throws NoCenter for an empty list.
ClassCenter class_center(ClassId class_id, std::span<const std::vector<double>> member_features);

/// dot(a,b) / (|a| |b|); 0 when either norm is below 1e-12.
double cosine_similarity_score(std::span<const double> a, std::span<const double> b);

/// Fills loss and similarity scores for every sample from the file's logits and features.
ScoreTable score_dataset(const Dataset& dataset, const std::vector<NoisyCluster>& clusters);

/// Same as score_dataset but with externally computed per-sample logits and embeddings.
ScoreTable score_embeddings(const std::vector<std::vector<double>>& logits,
                            const std::vector<std::vector<double>>& embeddings,
                            const std::vector<ClassId>& labels,
                            const std::vector<NoisyCluster>& clusters);

}  // namespace tssd
