#include "tssd/scoring.hpp"

#include "tssd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tssd {

double cross_entropy_score(std::span<const double> logits, ClassId label) {
    if (label >= logits.size())
        throw ContractViolation("label " + std::to_string(label) + " >= K=" +
                                std::to_string(logits.size()));
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - max_logit);
    const double loss = std::log(sum) - (logits[label] - max_logit);
    return std::max(loss, 0.0);
}

ClassCenter class_center(ClassId class_id, std::span<const std::vector<double>> member_features) {
    if (member_features.empty())
        throw NoCenter("class " + std::to_string(class_id) + " has no members");
    const std::size_t dim = member_features.front().size();
    ClassCenter out{class_id, std::vector<double>(dim, 0.0)};
    for (const auto& f : member_features) {
        if (f.size() != dim) throw ContractViolation("ragged feature vectors");
        for (std::size_t j = 0; j < dim; ++j) out.center[j] += f[j];
    }
    const double inv = 1.0 / static_cast<double>(member_features.size());
    for (double& v : out.center) v *= inv;
    return out;
}

double cosine_similarity_score(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("cosine similarity of unequal lengths");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

ScoreTable score_embeddings(const std::vector<std::vector<double>>& logits,
                            const std::vector<std::vector<double>>& embeddings,
                            const std::vector<ClassId>& labels,
                            const std::vector<NoisyCluster>& clusters) {
    const std::size_t n = labels.size();
    if (logits.size() != n || embeddings.size() != n)
        throw ContractViolation("score inputs have different lengths");
    ScoreTable table(n);
    for (std::size_t i = 0; i < n; ++i) table[i].loss_score = cross_entropy_score(logits[i], labels[i]);

    std::vector<std::vector<double>> members;
    for (const NoisyCluster& cluster : clusters) {
        if (cluster.member_ids.empty()) continue;
        members.clear();
        members.reserve(cluster.member_ids.size());
        for (SampleId id : cluster.member_ids) members.push_back(embeddings.at(id));
        const ClassCenter center = class_center(cluster.class_id, members);

        double center_norm = 0.0;
        for (double v : center.center) center_norm += v * v;
        const bool usable = std::sqrt(center_norm) >= 1e-12;
        for (SampleId id : cluster.member_ids) {
            table[id].sim_scored = usable;
            table[id].sim_score = usable ? cosine_similarity_score(embeddings[id], center.center) : 0.0;
        }
    }
    return table;
}

ScoreTable score_dataset(const Dataset& dataset, const std::vector<NoisyCluster>& clusters) {
    std::vector<std::vector<double>> logits, features;
    std::vector<ClassId> labels;
    logits.reserve(dataset.size());
    features.reserve(dataset.size());
    labels.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) {
        logits.push_back(s.logits);
        features.push_back(s.features);
        labels.push_back(s.noisy_label);
    }
    return score_embeddings(logits, features, labels, clusters);
}

}  // namespace tssd
