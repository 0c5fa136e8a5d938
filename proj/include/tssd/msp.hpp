#pragma once

#include "tssd/mlp.hpp"
#include "tssd/psd.hpp"
#include "tssd/scoring.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tssd {

/// Meta classifier [P^p, P^s] -> P^f: 2 -> H rectifier -> 1 logistic.
class MetaNet {
public:
    explicit MetaNet(std::size_t hidden = 10) : mlp_(2, hidden, 1) {}
    explicit MetaNet(Mlp mlp);

    static MetaNet random(std::size_t hidden, std::uint64_t seed);

    Mlp& mlp() { return mlp_; }
    const Mlp& mlp() const { return mlp_; }
    std::size_t hidden_dim() const { return mlp_.hidden_dim(); }

    bool operator==(const MetaNet&) const = default;

private:
    Mlp mlp_;
};

struct MetaRecord {
    std::array<double, 2> input{};  // (P^p, P^s)
    int label = 0;                  // 1 from the positive set, 0 from the negative set
};

using MetaDataset = std::vector<MetaRecord>;

struct MetaTrainConfig {
    double lr = 0.2;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    std::size_t hidden = 10;
    std::size_t patience = 5;
    double min_delta = 1e-4;
    std::uint64_t seed = 0;
};

struct MetaTrainHistory {
    std::vector<double> batch_bce;  // mean mini-batch BCE seen during each epoch
    std::vector<double> full_bce;   // BCE over all records, before training then after each epoch
    std::size_t best_epoch = 0;     // index into full_bce
};

/// Positive records first, then negative, in ascending id order. Throws MetaStarved
/// when either side of the certain set is empty.
MetaDataset build_meta_dataset(const Partition& partition, const ScoreTable& table);

double meta_forward(const MetaNet& net, std::array<double, 2> input);

/// -[b log p + (1-b) log(1-p)] with p clamped to [1e-7, 1-1e-7].
double bce_loss(double pred, int label);

/// Mean BCE over records; fills dLoss/dparams when grad is non-empty.
double meta_batch_loss(const MetaNet& net, std::span<const MetaRecord> records, std::span<double> grad);

/// Mini-batch SGD from the given initial state; returns the state with the lowest
/// full-data BCE seen. Stops early after `patience` epochs without improvement.
MetaNet train_meta(const MetaNet& net, const MetaDataset& data, const MetaTrainConfig& config,
                   MetaTrainHistory* history = nullptr);

/// Sets P^f for every sample that has both posteriors.
void fuse_scores(const MetaNet& net, ScoreTable& table);

/// lambda P^p + (1 - lambda) P^s.
double weighted_average_baseline(double p_loss, double p_sim, double lambda);
void fuse_scores_weighted(ScoreTable& table, double lambda);

/// Splits the uncertain set on P^f: >= t3 clean, <= t4 noisy, the band between dropped.
/// Uncertain samples without a fused score are dropped as well.
Partition purify(const ScoreTable& table, const Partition& partition, double t3, double t4);

void save_meta_net(const MetaNet& net, std::ostream& out);
MetaNet load_meta_net(std::istream& in);

}  // namespace tssd
