#include "tssd/msp.hpp"

#include "tssd/error.hpp"
#include "tssd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tssd {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

MetaNet::MetaNet(Mlp mlp) : mlp_(std::move(mlp)) {
    if (mlp_.in_dim() != 2 || mlp_.out_dim() != 1) throw InvalidSpec("meta net must map 2 inputs to 1 output");
}

MetaNet MetaNet::random(std::size_t hidden, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "meta/init"));
    return MetaNet(Mlp::random(2, hidden, 1, rng));
}

MetaDataset build_meta_dataset(const Partition& partition, const ScoreTable& table) {
    if (partition.positive.empty()) throw MetaStarved("certain set has no positive samples");
    if (partition.negative.empty()) throw MetaStarved("certain set has no negative samples");
    MetaDataset out;
    out.reserve(partition.positive.size() + partition.negative.size());
    auto add = [&](SampleId id, int label) {
        const ScoreRecord& r = table.at(id);
        if (!r.posterior_loss || !r.posterior_sim)
            throw ContractViolation("certain sample " + std::to_string(id) + " lacks posteriors");
        out.push_back({{*r.posterior_loss, *r.posterior_sim}, label});
    };
    for (SampleId id : partition.positive) add(id, 1);
    for (SampleId id : partition.negative) add(id, 0);
    return out;
}

double meta_forward(const MetaNet& net, std::array<double, 2> input) {
    Mlp::Activations acts;
    net.mlp().forward(input, acts);
    return sigmoid(acts.output[0]);
}

double bce_loss(double pred, int label) {
    const double p = std::clamp(pred, 1e-7, 1.0 - 1e-7);
    return label ? -std::log(p) : -std::log1p(-p);
}

double meta_batch_loss(const MetaNet& net, std::span<const MetaRecord> records, std::span<double> grad) {
    if (records.empty()) return 0.0;
    const double inv = 1.0 / static_cast<double>(records.size());
    Mlp::Activations acts;
    double total = 0.0;
    for (const MetaRecord& r : records) {
        net.mlp().forward(r.input, acts);
        const double p = sigmoid(acts.output[0]);
        total += bce_loss(p, r.label);
        if (!grad.empty()) {
            const double d = (p - static_cast<double>(r.label)) * inv;
            net.mlp().backward(r.input, acts, std::span<const double>(&d, 1), grad);
        }
    }
    return total * inv;
}

MetaNet train_meta(const MetaNet& net, const MetaDataset& data, const MetaTrainConfig& config,
                   MetaTrainHistory* history) {
    if (data.empty()) throw InvalidSpec("meta training needs at least one record");
    if (!(config.lr > 0.0)) throw InvalidSpec("meta lr must be positive");
    if (config.epochs < 1) throw InvalidSpec("meta epochs must be >= 1");
    if (config.batch_size < 1) throw InvalidSpec("meta batch size must be >= 1");

    MetaNet current = net;
    MetaNet best = net;
    double best_loss = meta_batch_loss(current, data, {});
    if (!std::isfinite(best_loss)) throw NumericalFailure("meta BCE is not finite before training");
    MetaTrainHistory local;
    local.full_bce.push_back(best_loss);

    Rng rng(derive_seed(config.seed, "meta/shuffle"));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<MetaRecord> batch;
    std::vector<double> grad(current.mlp().params().size());
    std::size_t stale = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double batch_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = meta_batch_loss(current, batch, grad);
            if (!std::isfinite(loss))
                throw NumericalFailure("meta BCE became non-finite in epoch " + std::to_string(epoch));
            batch_sum += loss;
            ++batches;
            auto params = current.mlp().params();
            for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.lr * grad[p];
        }
        local.batch_bce.push_back(batch_sum / static_cast<double>(batches));

        const double full = meta_batch_loss(current, data, {});
        if (!std::isfinite(full) || !current.mlp().finite())
            throw NumericalFailure("meta parameters became non-finite in epoch " + std::to_string(epoch));
        local.full_bce.push_back(full);
        if (full < best_loss - config.min_delta) {
            stale = 0;
        } else {
            ++stale;
        }
        if (full < best_loss) {
            best_loss = full;
            best = current;
            local.best_epoch = local.full_bce.size() - 1;
        }
        if (stale >= config.patience) break;
    }
    if (history) *history = std::move(local);
    return best;
}

void fuse_scores(const MetaNet& net, ScoreTable& table) {
    for (ScoreRecord& r : table) {
        if (r.posterior_loss && r.posterior_sim)
            r.fused = meta_forward(net, {*r.posterior_loss, *r.posterior_sim});
        else
            r.fused.reset();
    }
}

double weighted_average_baseline(double p_loss, double p_sim, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidSpec("lambda must be in [0,1]");
    return lambda * p_loss + (1.0 - lambda) * p_sim;
}

void fuse_scores_weighted(ScoreTable& table, double lambda) {
    for (ScoreRecord& r : table) {
        if (r.posterior_loss && r.posterior_sim)
            r.fused = weighted_average_baseline(*r.posterior_loss, *r.posterior_sim, lambda);
        else
            r.fused.reset();
    }
}

Partition purify(const ScoreTable& table, const Partition& partition, double t3, double t4) {
    if (t3 < t4) throw InvalidSpec("purification needs t3 >= t4");
    Partition out = partition;
    out.purified = true;
    out.clean_from_uncertain.clear();
    out.noisy_from_uncertain.clear();
    out.dropped.clear();
    for (SampleId id : partition.uncertain) {
        const auto& f = table.at(id).fused;
        if (!f)
            out.dropped.push_back(id);
        else if (*f >= t3)
            out.clean_from_uncertain.push_back(id);
        else if (*f <= t4)
            out.noisy_from_uncertain.push_back(id);
        else
            out.dropped.push_back(id);
    }
    return out;
}

void save_meta_net(const MetaNet& net, std::ostream& out) { net.mlp().save(out); }

MetaNet load_meta_net(std::istream& in) { return MetaNet(Mlp::load(in)); }

}  // namespace tssd
