#include "tssd/ssl.hpp"

#include "tssd/error.hpp"
#include "tssd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tssd {

ToyClassifier ToyClassifier::random(std::size_t in, std::size_t hidden, std::size_t classes,
                                    std::uint64_t seed) {
    Rng rng(seed);
    return ToyClassifier(Mlp::random(in, hidden, classes, rng));
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    const double m = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

std::vector<double> ToyClassifier::probabilities(std::span<const double> x) const {
    Mlp::Activations acts;
    mlp_.forward(x, acts);
    return softmax(acts.output);
}

std::vector<double> refine_label(std::span<const double> y_noisy, double fused, std::span<const double> p_ens) {
    if (y_noisy.size() != p_ens.size()) throw ContractViolation("refine_label length mismatch");
    if (!(fused >= 0.0 && fused <= 1.0)) throw ContractViolation("fused score outside [0,1]");
    std::vector<double> out(y_noisy.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fused * y_noisy[k] + (1.0 - fused) * p_ens[k];
    return out;
}

std::vector<double> co_guess(const std::vector<std::vector<double>>& preds) {
    if (preds.empty()) throw ContractViolation("co_guess needs at least one prediction");
    std::vector<double> out(preds.front().size(), 0.0);
    for (const auto& p : preds) {
        if (p.size() != out.size()) throw ContractViolation("co_guess length mismatch");
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += p[k];
    }
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= sum;
    return out;
}

double labeled_loss(const std::vector<std::vector<double>>& preds,
                    const std::vector<std::vector<double>>& targets) {
    if (preds.size() != targets.size()) throw ContractViolation("labeled_loss size mismatch");
    if (preds.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t k = 0; k < preds[i].size(); ++k)
            total -= targets[i][k] * std::log(std::max(preds[i][k], 1e-7));
    return total / static_cast<double>(preds.size());
}

double unlabeled_loss(const std::vector<std::vector<double>>& preds,
                      const std::vector<std::vector<double>>& guesses) {
    if (preds.size() != guesses.size()) throw ContractViolation("unlabeled_loss size mismatch");
    if (preds.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t k = 0; k < preds[i].size(); ++k) {
            const double d = guesses[i][k] - preds[i][k];
            total += d * d;
        }
    return total / static_cast<double>(preds.size());
}

double reg_loss(std::span<const double> mean_pred) {
    const double prior = 1.0 / static_cast<double>(mean_pred.size());
    double total = 0.0;
    for (double p : mean_pred) total += prior * std::log(prior / std::max(p, 1e-7));
    return std::max(total, 0.0);
}

double total_loss(double l_c, double l_u, double l_reg, double lambda_u, double lambda_r) {
    return l_c + lambda_u * l_u + lambda_r * l_reg;
}

double batch_loss(const ToyClassifier& model, std::span<const TrainItem> batch, LossWeights weights,
                  std::span<double> grad) {
    if (batch.empty()) return 0.0;
    const std::size_t k = model.num_classes();
    const auto b = static_cast<double>(batch.size());
    const auto n_labeled = static_cast<double>(
        std::count_if(batch.begin(), batch.end(), [](const TrainItem& it) { return it.labeled; }));
    const double n_unlabeled = b - n_labeled;

    std::vector<Mlp::Activations> acts(batch.size());
    std::vector<std::vector<double>> probs(batch.size());
    std::vector<double> mean_pred(k, 0.0);
    double l_c = 0.0, l_u = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        model.forward(batch[i].x, acts[i]);
        probs[i] = softmax(acts[i].output);
        for (std::size_t c = 0; c < k; ++c) {
            mean_pred[c] += probs[i][c] / b;
            if (batch[i].labeled) {
                l_c -= batch[i].target[c] * std::log(std::max(probs[i][c], 1e-7));
            } else {
                const double d = batch[i].target[c] - probs[i][c];
                l_u += d * d;
            }
        }
    }
    if (n_labeled > 0) l_c /= n_labeled;
    if (n_unlabeled > 0) l_u /= n_unlabeled;
    const bool use_reg = weights.lambda_r != 0.0;
    const double l_reg = use_reg ? reg_loss(mean_pred) : 0.0;
    const double loss = total_loss(l_c, l_u, l_reg, weights.lambda_u, weights.lambda_r);
    if (grad.empty()) return loss;

    const double prior = 1.0 / static_cast<double>(k);
    std::vector<double> d_logits(k), d_prob(k);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& p = probs[i];
        std::fill(d_logits.begin(), d_logits.end(), 0.0);
        std::fill(d_prob.begin(), d_prob.end(), 0.0);
        if (batch[i].labeled) {
            for (std::size_t c = 0; c < k; ++c) d_logits[c] = (p[c] - batch[i].target[c]) / n_labeled;
        } else if (weights.lambda_u != 0.0) {
            for (std::size_t c = 0; c < k; ++c)
                d_prob[c] += weights.lambda_u * 2.0 * (p[c] - batch[i].target[c]) / n_unlabeled;
        }
        if (use_reg)
            for (std::size_t c = 0; c < k; ++c)
                d_prob[c] -= weights.lambda_r * prior / (b * std::max(mean_pred[c], 1e-7));
        // Softmax Jacobian: dz_c = p_c (g_c - sum_j g_j p_j).
        double dot = 0.0;
        for (std::size_t c = 0; c < k; ++c) dot += d_prob[c] * p[c];
        for (std::size_t c = 0; c < k; ++c) d_logits[c] += p[c] * (d_prob[c] - dot);
        model.mlp().backward(batch[i].x, acts[i], d_logits, grad);
    }
    return loss;
}

void SgdOptimizer::step(std::span<double> params, std::span<const double> grad) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity_[i] = momentum_ * velocity_[i] + grad[i];
        params[i] -= lr_ * velocity_[i];
    }
}

Ensemble make_ensemble(std::size_t in, std::size_t classes, const TrainConfig& config) {
    if (config.ensemble_size < 1) throw InvalidSpec("ensemble size must be >= 1");
    Ensemble out;
    for (std::size_t m = 0; m < config.ensemble_size; ++m)
        out.push_back(ToyClassifier::random(in, config.hidden, classes,
                                            derive_seed(config.seed, "classifier/init", m)));
    return out;
}

void train_epoch(ToyClassifier& model, SgdOptimizer& opt, const std::vector<TrainItem>& items,
                 LossWeights weights, std::size_t batch_size, std::uint64_t seed) {
    if (batch_size < 1) throw InvalidSpec("batch size must be >= 1");
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> grad(model.mlp().params().size());
    std::vector<TrainItem> batch;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(items[order[i]]);
        std::fill(grad.begin(), grad.end(), 0.0);
        const double loss = batch_loss(model, batch, weights, grad);
        if (!std::isfinite(loss)) throw NumericalFailure("classifier loss became non-finite");
        opt.step(model.mlp().params(), grad);
    }
    if (!model.mlp().finite()) throw NumericalFailure("classifier parameters became non-finite");
}

namespace {

std::vector<std::vector<double>> one_hot_labels(const Dataset& dataset) {
    std::vector<std::vector<double>> out(dataset.size(), std::vector<double>(dataset.num_classes(), 0.0));
    for (const Sample& s : dataset.samples()) out[s.id][s.noisy_label] = 1.0;
    return out;
}

}  // namespace

Ensemble warmup(Ensemble ensemble, const Dataset& dataset, std::size_t epochs, double lr,
                std::uint64_t seed, double momentum, std::size_t batch_size) {
    if (epochs == 0) return ensemble;
    if (!(lr > 0.0)) throw InvalidSpec("lr must be positive");
    const auto targets = one_hot_labels(dataset);
    std::vector<TrainItem> items;
    items.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) items.push_back({s.features, targets[s.id], true});

    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        const std::uint64_t member_seed = derive_seed(seed, "warmup", m);
        SgdOptimizer opt(ensemble[m].mlp().params().size(), lr, momentum);
        for (std::size_t e = 0; e < epochs; ++e)
            train_epoch(ensemble[m], opt, items, {}, batch_size, derive_seed(member_seed, "epoch", e));
    }
    return ensemble;
}

std::vector<std::vector<double>> ensemble_predict(const Ensemble& ensemble, const Dataset& dataset) {
    std::vector<std::vector<double>> out;
    out.reserve(dataset.size());
    std::vector<std::vector<double>> member_preds(ensemble.size());
    for (const Sample& s : dataset.samples()) {
        for (std::size_t m = 0; m < ensemble.size(); ++m) member_preds[m] = ensemble[m].probabilities(s.features);
        out.push_back(co_guess(member_preds));
    }
    return out;
}

ScoreTable ensemble_scores(const Ensemble& ensemble, const Dataset& dataset,
                           const std::vector<NoisyCluster>& clusters) {
    if (ensemble.empty()) throw ContractViolation("empty ensemble");
    std::vector<ClassId> labels;
    labels.reserve(dataset.size());
    for (const Sample& s : dataset.samples()) labels.push_back(s.noisy_label);

    ScoreTable mean(dataset.size());
    std::vector<std::vector<double>> logits(dataset.size()), hidden(dataset.size());
    Mlp::Activations acts;
    for (const ToyClassifier& model : ensemble) {
        for (const Sample& s : dataset.samples()) {
            model.forward(s.features, acts);
            logits[s.id] = acts.output;
            hidden[s.id] = acts.hidden;
        }
        const ScoreTable member = score_embeddings(logits, hidden, labels, clusters);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i].loss_score += member[i].loss_score;
            mean[i].sim_score += member[i].sim_score;
            mean[i].sim_scored = mean[i].sim_scored && member[i].sim_scored;
        }
    }
    const double inv = 1.0 / static_cast<double>(ensemble.size());
    for (ScoreRecord& r : mean) {
        r.loss_score *= inv;
        r.sim_score *= inv;
    }
    return mean;
}

RoundResult distill_round(const Ensemble& ensemble, const Dataset& dataset, const SelectionConfig& selection,
                          const TrainConfig& config, std::size_t round) {
    RoundResult result;
    result.ensemble = ensemble;
    const auto clusters = partition_by_label(dataset);
    result.table = ensemble_scores(ensemble, dataset, clusters);

    SelectionConfig sel = selection;
    sel.meta.seed = derive_seed(config.seed, "round/meta", round);
    SelectionOutcome outcome = select_samples(result.table, clusters, sel);
    result.partition = std::move(outcome.partition);
    result.fits = std::move(outcome.fits);
    result.meta_net = std::move(outcome.meta_net);
    result.fallbacks = std::move(outcome.fallbacks);

    const auto p_ens = ensemble_predict(ensemble, dataset);
    const std::size_t k = dataset.num_classes();
    std::vector<std::vector<double>> targets(dataset.size());
    std::vector<TrainItem> items;
    std::vector<double> y(k);
    for (SampleId id : result.partition.clean()) {
        std::fill(y.begin(), y.end(), 0.0);
        y[dataset[id].noisy_label] = 1.0;
        targets[id] = refine_label(y, *result.table[id].fused, p_ens[id]);
    }
    for (SampleId id : result.partition.noisy()) targets[id] = p_ens[id];
    const auto clean = result.partition.clean();
    const auto noisy = result.partition.noisy();
    items.reserve(clean.size() + noisy.size());
    for (SampleId id : clean) items.push_back({dataset[id].features, targets[id], true});
    for (SampleId id : noisy) items.push_back({dataset[id].features, targets[id], false});

    double ramp = 1.0;
    if (config.lambda_u_rampup > 0)
        ramp = std::min(1.0, static_cast<double>(round + 1) / static_cast<double>(config.lambda_u_rampup));
    const LossWeights weights{config.lambda_u * ramp, config.lambda_r};
    for (std::size_t m = 0; m < result.ensemble.size(); ++m) {
        SgdOptimizer opt(result.ensemble[m].mlp().params().size(), config.lr, config.momentum);
        train_epoch(result.ensemble[m], opt, items, weights, config.batch_size,
                    derive_seed(config.seed, "round/train", round * result.ensemble.size() + m));
    }
    return result;
}

Ensemble train_ce_baseline(const Dataset& dataset, const TrainConfig& config) {
    Ensemble ensemble = make_ensemble(dataset.feature_dim(), dataset.num_classes(), config);
    return warmup(std::move(ensemble), dataset, config.warmup_epochs + config.rounds, config.lr, config.seed,
                  config.momentum, config.batch_size);
}

void save_classifier(const ToyClassifier& model, std::ostream& out) { model.mlp().save(out); }

ToyClassifier load_classifier(std::istream& in) { return ToyClassifier(Mlp::load(in)); }

}  // namespace tssd
