#include "tssd/distill.hpp"

#include "tssd/error.hpp"

namespace tssd {

SelectionOutcome select_samples(ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                                const SelectionConfig& config) {
    SelectionOutcome out;
    out.fits = assign_posteriors(table, clusters, config.gmm);
    for (const ClassFit& fit : out.fits) {
        if (fit.degenerate() && !clusters[fit.class_id].member_ids.empty())
            out.fallbacks.push_back("degenerate_fit: class " + std::to_string(fit.class_id) +
                                    " sent to uncertain");
    }

    Partition divided = divide_dataset(table, clusters, config.t1, config.t2);

    try {
        const MetaDataset meta = build_meta_dataset(divided, table);
        MetaNet net = MetaNet::random(config.meta.hidden, config.meta.seed);
        net = train_meta(net, meta, config.meta);
        fuse_scores(net, table);
        out.meta_net = std::move(net);
    } catch (const MetaStarved& e) {
        out.fallbacks.push_back(std::string("meta_starved: ") + e.what() +
                                "; fused with weighted average lambda=0.5");
        fuse_scores_weighted(table, 0.5);
    }

    std::vector<double> uncertain_fused;
    for (SampleId id : divided.uncertain)
        if (table[id].fused) uncertain_fused.push_back(*table[id].fused);
    auto resolve = [&](const ThresholdStrategy& s) {
        if (uncertain_fused.empty() && s.kind == ThresholdStrategy::Kind::Percentile) return s.value;
        return resolve_threshold(s, uncertain_fused);
    };
    out.t3 = resolve(config.t3);
    out.t4 = resolve(config.t4);
    out.partition = purify(table, divided, out.t3, out.t4);
    return out;
}

}  // namespace tssd
