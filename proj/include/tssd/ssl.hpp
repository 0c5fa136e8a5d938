#pragma once

#include "tssd/dataset.hpp"
#include "tssd/distill.hpp"
#include "tssd/mlp.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tssd {

/// D -> H rectifier -> K classifier. The rectified hidden layer doubles as the embedding
/// used for feature-space scoring.
class ToyClassifier {
public:
    ToyClassifier() = default;
    explicit ToyClassifier(Mlp mlp) : mlp_(std::move(mlp)) {}
    static ToyClassifier random(std::size_t in, std::size_t hidden, std::size_t classes, std::uint64_t seed);

    Mlp& mlp() { return mlp_; }
    const Mlp& mlp() const { return mlp_; }
    std::size_t num_classes() const { return mlp_.out_dim(); }

    /// Logits and hidden activations for one input.
    void forward(std::span<const double> x, Mlp::Activations& acts) const { mlp_.forward(x, acts); }
    std::vector<double> probabilities(std::span<const double> x) const;

    bool operator==(const ToyClassifier&) const = default;

private:
    Mlp mlp_;
};

using Ensemble = std::vector<ToyClassifier>;

struct TrainConfig {
    std::size_t warmup_epochs = 10;
    std::size_t rounds = 5;
    double lr = 0.04;
    double momentum = 0.9;
    double lambda_u = 30.0;
    double lambda_r = 1.0;
    std::size_t lambda_u_rampup = 16;  // rounds over which lambda_u ramps linearly from 0; 0 = off
    std::size_t ensemble_size = 2;
    std::size_t hidden = 32;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
};

std::vector<double> softmax(std::span<const double> logits);

/// P^f * y + (1 - P^f) * p.
std::vector<double> refine_label(std::span<const double> y_noisy, double fused, std::span<const double> p_ens);

/// Elementwise mean of the member predictions, renormalized to sum 1.
std::vector<double> co_guess(const std::vector<std::vector<double>>& preds);

/// Soft-target cross-entropy averaged over the set; 0 for an empty set.
double labeled_loss(const std::vector<std::vector<double>>& preds, const std::vector<std::vector<double>>& targets);

/// Mean squared distance between prediction and guess; 0 for an empty set.
double unlabeled_loss(const std::vector<std::vector<double>>& preds, const std::vector<std::vector<double>>& guesses);

/// KL(uniform || mean prediction).
double reg_loss(std::span<const double> mean_pred);

double total_loss(double l_c, double l_u, double l_reg, double lambda_u, double lambda_r);

/// One training example: input, target distribution, and whether the target is a
/// (refined) label or a co-guessed pseudo-label.
struct TrainItem {
    std::span<const double> x;
    std::span<const double> target;
    bool labeled = true;
};

struct LossWeights {
    double lambda_u = 0.0;
    double lambda_r = 0.0;
};

/// L_C + lambda_u L_U + lambda_r L_reg over one batch; accumulates dLoss/dparams into grad
/// when it is non-empty.
double batch_loss(const ToyClassifier& model, std::span<const TrainItem> batch, LossWeights weights,
                  std::span<double> grad);

/// SGD with momentum; state persists across epochs of the same model.
class SgdOptimizer {
public:
    SgdOptimizer(std::size_t num_params, double lr, double momentum)
        : lr_(lr), momentum_(momentum), velocity_(num_params, 0.0) {}
    void step(std::span<double> params, std::span<const double> grad);

private:
    double lr_;
    double momentum_;
    std::vector<double> velocity_;
};

Ensemble make_ensemble(std::size_t in, std::size_t classes, const TrainConfig& config);

/// One epoch over `items` in a seeded order.
void train_epoch(ToyClassifier& model, SgdOptimizer& opt, const std::vector<TrainItem>& items,
                 LossWeights weights, std::size_t batch_size, std::uint64_t seed);

/// Plain cross-entropy on the noisy labels. Member m uses a seed derived from (seed, m).
Ensemble warmup(Ensemble ensemble, const Dataset& dataset, std::size_t epochs, double lr,
                std::uint64_t seed, double momentum = 0.9, std::size_t batch_size = 64);

/// Ensemble-averaged class probabilities for every sample.
std::vector<std::vector<double>> ensemble_predict(const Ensemble& ensemble, const Dataset& dataset);

/// Mean over members of each member's own loss and similarity scores.
ScoreTable ensemble_scores(const Ensemble& ensemble, const Dataset& dataset,
                           const std::vector<NoisyCluster>& clusters);

struct RoundResult {
    Ensemble ensemble;
    Partition partition;
    ScoreTable table;
    std::vector<ClassFit> fits;
    std::optional<MetaNet> meta_net;
    std::vector<std::string> fallbacks;
};

/// Score with the current ensemble, divide and purify, build refined labels for the clean
/// set and co-guessed targets for the noisy set, then train each member for one epoch.
RoundResult distill_round(const Ensemble& ensemble, const Dataset& dataset, const SelectionConfig& selection,
                          const TrainConfig& config, std::size_t round);

/// Warm-up followed by `rounds` plain cross-entropy epochs: the same budget with no selection.
Ensemble train_ce_baseline(const Dataset& dataset, const TrainConfig& config);

void save_classifier(const ToyClassifier& model, std::ostream& out);
ToyClassifier load_classifier(std::istream& in);

}  // namespace tssd
