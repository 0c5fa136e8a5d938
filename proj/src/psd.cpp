#include "tssd/psd.hpp"

#include "tssd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace tssd {

namespace {

std::vector<SampleId> merged(const std::vector<SampleId>& a, const std::vector<SampleId>& b) {
    std::vector<SampleId> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::vector<SampleId> Partition::certain() const { return merged(positive, negative); }
std::vector<SampleId> Partition::clean() const { return merged(positive, clean_from_uncertain); }
std::vector<SampleId> Partition::noisy() const { return merged(negative, noisy_from_uncertain); }

ThresholdStrategy ThresholdStrategy::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InvalidSpec("threshold strategy must look like kind:value, got '" + std::string(text) + "'");
    const auto kind = text.substr(0, colon);
    const auto num = text.substr(colon + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size())
        throw InvalidSpec("bad threshold value '" + std::string(num) + "'");
    if (!(value >= 0.0 && value <= 1.0)) throw InvalidSpec("threshold parameter must be in [0,1]");
    if (kind == "fixed") return fixed(value);
    if (kind == "noise_rate") return noise_rate(value);
    if (kind == "percentile") return percentile(value);
    throw InvalidSpec("unknown threshold strategy '" + std::string(kind) + "'");
}

std::string ThresholdStrategy::to_string() const {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    const std::string v(buf, ptr);
    switch (kind) {
        case Kind::Fixed: return "fixed:" + v;
        case Kind::NoiseRate: return "noise_rate:" + v;
        case Kind::Percentile: return "percentile:" + v;
    }
    return v;
}

double resolve_threshold(const ThresholdStrategy& strategy, const std::vector<double>& posteriors) {
    if (!(strategy.value >= 0.0 && strategy.value <= 1.0))
        throw InvalidSpec("threshold parameter must be in [0,1]");
    switch (strategy.kind) {
        case ThresholdStrategy::Kind::Fixed:
        case ThresholdStrategy::Kind::NoiseRate:
            return strategy.value;
        case ThresholdStrategy::Kind::Percentile: {
            if (posteriors.empty()) throw InvalidSpec("percentile threshold over an empty list");
            std::vector<double> sorted = posteriors;
            std::sort(sorted.begin(), sorted.end());
            const auto n = static_cast<double>(sorted.size());
            auto rank = static_cast<std::ptrdiff_t>(std::ceil(strategy.value * n)) - 1;
            rank = std::clamp<std::ptrdiff_t>(rank, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
            return sorted[static_cast<std::size_t>(rank)];
        }
    }
    return strategy.value;
}

ClusterDivision divide_cluster(const std::vector<std::pair<double, double>>& scores, double t1,
                               double t2) {
    ClusterDivision out;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto [p_loss, p_sim] = scores[i];
        if (p_loss > t1 && p_sim > t2)
            out.positive.push_back(i);
        else if (p_loss <= t1 && p_sim <= t2)
            out.negative.push_back(i);
        else
            out.uncertain.push_back(i);
    }
    return out;
}

std::vector<ClassFit> assign_posteriors(ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                                        const GmmConfig& config) {
    std::vector<ClassFit> fits;
    fits.reserve(clusters.size());
    std::vector<double> values;
    for (const NoisyCluster& cluster : clusters) {
        ClassFit fit;
        fit.class_id = cluster.class_id;
        for (SampleId id : cluster.member_ids) {
            table.at(id).posterior_loss.reset();
            table[id].posterior_sim.reset();
        }

        GmmConfig loss_cfg = config;
        loss_cfg.orientation = Orientation::SmallerMeanClean;
        values.clear();
        for (SampleId id : cluster.member_ids) values.push_back(table[id].loss_score);
        try {
            fit.loss_fit = fit_gmm1d(values, loss_cfg);
        } catch (const DegenerateFit&) {
        }

        GmmConfig sim_cfg = config;
        sim_cfg.orientation = Orientation::LargerMeanClean;
        values.clear();
        const bool all_scored = std::all_of(cluster.member_ids.begin(), cluster.member_ids.end(),
                                            [&](SampleId id) { return table[id].sim_scored; });
        if (all_scored) {
            for (SampleId id : cluster.member_ids) values.push_back(table[id].sim_score);
            try {
                fit.sim_fit = fit_gmm1d(values, sim_cfg);
            } catch (const DegenerateFit&) {
            }
        }

        if (!fit.degenerate()) {
            for (SampleId id : cluster.member_ids) {
                table[id].posterior_loss = posterior(*fit.loss_fit, table[id].loss_score);
                table[id].posterior_sim = posterior(*fit.sim_fit, table[id].sim_score);
            }
        }
        fits.push_back(std::move(fit));
    }
    return fits;
}

Partition divide_dataset(const ScoreTable& table, const std::vector<NoisyCluster>& clusters,
                         const ThresholdStrategy& loss_strategy,
                         const ThresholdStrategy& feature_strategy) {
    Partition out;
    out.num_samples = table.size();
    std::vector<std::pair<double, double>> scores;
    std::vector<SampleId> scored_ids;
    std::vector<double> loss_post, sim_post;
    for (const NoisyCluster& cluster : clusters) {
        scores.clear();
        scored_ids.clear();
        loss_post.clear();
        sim_post.clear();
        for (SampleId id : cluster.member_ids) {
            const ScoreRecord& r = table.at(id);
            if (r.posterior_loss && r.posterior_sim) {
                scores.emplace_back(*r.posterior_loss, *r.posterior_sim);
                scored_ids.push_back(id);
                loss_post.push_back(*r.posterior_loss);
                sim_post.push_back(*r.posterior_sim);
            } else {
                out.uncertain.push_back(id);
            }
        }
        if (scores.empty()) continue;
        const double t1 = resolve_threshold(loss_strategy, loss_post);
        const double t2 = resolve_threshold(feature_strategy, sim_post);
        const ClusterDivision division = divide_cluster(scores, t1, t2);
        for (auto i : division.positive) out.positive.push_back(scored_ids[i]);
        for (auto i : division.negative) out.negative.push_back(scored_ids[i]);
        for (auto i : division.uncertain) out.uncertain.push_back(scored_ids[i]);
    }
    std::sort(out.positive.begin(), out.positive.end());
    std::sort(out.negative.begin(), out.negative.end());
    std::sort(out.uncertain.begin(), out.uncertain.end());
    if (out.positive.size() + out.negative.size() + out.uncertain.size() != out.num_samples)
        throw ContractViolation("clusters do not cover the score table");
    return out;
}

std::vector<SampleId> single_space_selection(const ScoreTable& table,
                                             const std::vector<NoisyCluster>& clusters,
                                             const ThresholdStrategy& strategy, Space space) {
    std::vector<SampleId> out;
    std::vector<double> post;
    std::vector<SampleId> ids;
    for (const NoisyCluster& cluster : clusters) {
        post.clear();
        ids.clear();
        for (SampleId id : cluster.member_ids) {
            const auto& p = space == Space::Loss ? table.at(id).posterior_loss : table.at(id).posterior_sim;
            if (!p) continue;
            post.push_back(*p);
            ids.push_back(id);
        }
        if (post.empty()) continue;
        const double t = resolve_threshold(strategy, post);
        for (std::size_t i = 0; i < post.size(); ++i)
            if (post[i] > t) out.push_back(ids[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> partition_tags(const Partition& partition) {
    std::vector<std::string> tags(partition.num_samples);
    for (SampleId id : partition.positive) tags.at(id) = "P";
    for (SampleId id : partition.negative) tags.at(id) = "N";
    if (!partition.purified) {
        for (SampleId id : partition.uncertain) tags.at(id) = "U";
    } else {
        for (SampleId id : partition.clean_from_uncertain) tags.at(id) = "C";
        for (SampleId id : partition.noisy_from_uncertain) tags.at(id) = "UN";
        for (SampleId id : partition.dropped) tags.at(id) = "DROPPED";
    }
    for (std::size_t id = 0; id < tags.size(); ++id)
        if (tags[id].empty()) throw ContractViolation("partition leaves id " + std::to_string(id) + " untagged");
    return tags;
}

void write_partition(const Partition& partition, std::ostream& out) {
    const auto tags = partition_tags(partition);
    for (std::size_t id = 0; id < tags.size(); ++id) out << id << ',' << tags[id] << '\n';
}

std::vector<std::pair<SampleId, std::string>> read_partition_tags(std::istream& in) {
    std::vector<std::pair<SampleId, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected id,tag", lineno);
        SampleId id = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, id);
        if (ec != std::errc() || ptr != line.data() + comma) throw ParseError("bad id", lineno);
        std::string tag = line.substr(comma + 1);
        if (tag != "P" && tag != "N" && tag != "U" && tag != "C" && tag != "UN" && tag != "DROPPED")
            throw ParseError("unknown tag '" + tag + "'", lineno);
        out.emplace_back(id, std::move(tag));
    }
    return out;
}

}  // namespace tssd
