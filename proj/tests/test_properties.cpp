// Randomized invariant checks with small hand-rolled generators.
#include "helpers.hpp"

#include "tssd/gmm.hpp"
#include "tssd/msp.hpp"
#include "tssd/psd.hpp"
#include "tssd/scoring.hpp"
#include "tssd/ssl.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace tssd;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

bool subset(const std::vector<SampleId>& a, const std::vector<SampleId>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<SampleId> intersect(const std::vector<SampleId>& a, const std::vector<SampleId>& b) {
    std::vector<SampleId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

ThresholdStrategy random_strategy(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return ThresholdStrategy::fixed(u(rng));
        case 1: return ThresholdStrategy::noise_rate(u(rng));
        default: return ThresholdStrategy::percentile(u(rng));
    }
}

struct Instance {
    ScoreTable table;
    std::vector<NoisyCluster> clusters;
};

Instance random_instance(Rng& rng) {
    std::uniform_int_distribution<std::size_t> classes(1, 4), size(0, 40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance inst;
    const std::size_t k = classes(rng);
    const std::size_t n = size(rng);
    inst.table.resize(n);
    inst.clusters.resize(k);
    for (std::size_t c = 0; c < k; ++c) inst.clusters[c].class_id = c;
    for (std::size_t i = 0; i < n; ++i) {
        inst.clusters[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)].member_ids.push_back(i);
        if (u(rng) < 0.9) {
            // Coarse grid so ties with thresholds actually happen.
            inst.table[i].posterior_loss = std::round(u(rng) * 20.0) / 20.0;
            inst.table[i].posterior_sim = std::round(u(rng) * 20.0) / 20.0;
        }
        if (u(rng) < 0.95) inst.table[i].fused = std::round(u(rng) * 20.0) / 20.0;
    }
    return inst;
}

}  // namespace

TEST_CASE("cross-entropy is invariant to a common logit shift") {
    Rng rng(1);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto logits = testing::uniform_vector(rng, 2 + trial % 9, -20.0, 20.0);
        const std::size_t label = static_cast<std::size_t>(trial) % logits.size();
        const double base = cross_entropy_score(logits, label);
        const double c = shift(rng);
        for (double& z : logits) z += c;
        CHECK(std::abs(cross_entropy_score(logits, label) - base) <= 1e-9);
    }
}

TEST_CASE("cosine similarity is invariant to positive scaling") {
    Rng rng(2);
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = testing::uniform_vector(rng, 1 + trial % 16, -1.0, 1.0);
        auto b = testing::uniform_vector(rng, a.size(), -1.0, 1.0);
        const double base = cosine_similarity_score(a, b);
        const double s = std::pow(10.0, log_scale(rng));
        for (double& v : b) v *= s;
        CHECK(std::abs(cosine_similarity_score(a, b) - base) <= 1e-9);
        CHECK(std::abs(base) <= 1.0);
    }
}

TEST_CASE("distribution-valued outputs sum to one") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + static_cast<std::size_t>(trial) % 10;
        const auto p = softmax(testing::uniform_vector(rng, k, -30.0, 30.0));
        CHECK(std::abs(sum(p) - 1.0) <= 1e-6);
        const auto q = softmax(testing::uniform_vector(rng, k, -5.0, 5.0));
        CHECK(std::abs(sum(co_guess({p, q})) - 1.0) <= 1e-6);
        std::vector<double> y(k, 0.0);
        y[static_cast<std::size_t>(trial) % k] = 1.0;
        const double f = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        CHECK(std::abs(sum(refine_label(y, f, q)) - 1.0) <= 1e-6);
    }
    SyntheticSpec spec;
    spec.num_samples = 200;
    const Dataset d = generate_synthetic(spec);
    TrainConfig cfg;
    for (const auto& row : ensemble_predict(make_ensemble(d.feature_dim(), d.num_classes(), cfg), d))
        CHECK(std::abs(sum(row) - 1.0) <= 1e-6);
}

TEST_CASE("EM never lowers the log-likelihood and posteriors complement") {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double w = 0.1 + 0.8 * u(rng);
        const double m0 = 4.0 * u(rng) - 2.0, m1 = 4.0 * u(rng) - 2.0;
        std::normal_distribution<double> a(m0, 0.05 + u(rng)), b(m1, 0.05 + u(rng));
        std::bernoulli_distribution coin(w);
        std::vector<double> v(20 + static_cast<std::size_t>(trial) * 3);
        for (double& x : v) x = coin(rng) ? a(rng) : b(rng);
        const Gmm1d g = fit_gmm1d(v, GmmConfig{});
        for (std::size_t i = 1; i < g.log_likelihood.size(); ++i)
            REQUIRE(g.log_likelihood[i] >= g.log_likelihood[i - 1] - 1e-9);
        CHECK(std::abs(g.weights[0] + g.weights[1] - 1.0) <= 1e-9);
        CHECK(g.variances[0] >= 1e-6);
        CHECK(g.variances[1] >= 1e-6);
        for (int j = 0; j < 10; ++j) {
            const double x = 6.0 * u(rng) - 3.0;
            const double s = component_posterior(g, 0, x) + component_posterior(g, 1, x);
            CHECK(std::abs(s - 1.0) <= 1e-12);
            const double p = posterior(g, x);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
}

TEST_CASE("mixture fit does not depend on input order") {
    Rng rng(5);
    std::normal_distribution<double> a(0.0, 0.2), b(1.5, 0.4);
    std::vector<double> v;
    for (int i = 0; i < 300; ++i) v.push_back(i % 3 ? a(rng) : b(rng));
    const Gmm1d g = fit_gmm1d(v, GmmConfig{});
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(v.begin(), v.end(), rng);
        const Gmm1d h = fit_gmm1d(v, GmmConfig{});
        CHECK(h.means == g.means);
        CHECK(h.variances == g.variances);
        CHECK(h.weights == g.weights);
    }
}

TEST_CASE("percentile cutoff is monotone in p") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const auto v = testing::uniform_vector(rng, 1 + static_cast<std::size_t>(trial) % 30, 0.0, 1.0);
        double prev = -1.0;
        for (double p = 0.0; p <= 1.0; p += 0.05) {
            const double t = resolve_threshold(ThresholdStrategy::percentile(p), v);
            CHECK(t >= prev);
            CHECK(std::find(v.begin(), v.end(), t) != v.end());
            prev = t;
        }
    }
}

TEST_CASE("partition algebra over random instances") {
    Rng rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Instance inst = random_instance(rng);
        const std::size_t n = inst.table.size();
        const ThresholdStrategy s1 = random_strategy(rng), s2 = random_strategy(rng);
        const Partition p = divide_dataset(inst.table, inst.clusters, s1, s2);

        // S_p, S_n, S_u are a disjoint cover of all ids.
        REQUIRE(p.positive.size() + p.negative.size() + p.uncertain.size() == n);
        std::set<SampleId> seen;
        for (const auto* part : {&p.positive, &p.negative, &p.uncertain})
            for (SampleId id : *part) REQUIRE(seen.insert(id).second);
        REQUIRE(seen.size() == n);

        const double a = u(rng), b = u(rng);
        const Partition q = purify(inst.table, p, std::max(a, b), std::min(a, b));
        const auto c = q.clean(), un = q.noisy();
        CHECK(subset(p.positive, c));
        CHECK(subset(p.negative, un));
        CHECK(intersect(c, un).empty());
        CHECK(c.size() + un.size() + q.dropped.size() == n);
        if (a == b) CHECK(std::all_of(q.dropped.begin(), q.dropped.end(),
                                      [&](SampleId id) { return !inst.table[id].fused; }));

        // Raising t1 never grows S_p and never shrinks S_n.
        const double t = u(rng);
        const double t_up = t + (1.0 - t) * u(rng);
        const auto f2 = ThresholdStrategy::fixed(u(rng));
        const Partition lo = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::fixed(t), f2);
        const Partition hi = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::fixed(t_up), f2);
        CHECK(subset(hi.positive, lo.positive));
        CHECK(subset(lo.negative, hi.negative));
        const Partition plo = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::percentile(t), f2);
        const Partition phi = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::percentile(t_up), f2);
        CHECK(subset(phi.positive, plo.positive));
        CHECK(subset(plo.negative, phi.negative));
    }
}

TEST_CASE("threshold extremes") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Instance inst = random_instance(rng);
        const Partition zero = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::fixed(0.0),
                                              ThresholdStrategy::fixed(0.0));
        for (SampleId id : zero.uncertain) {
            const auto& r = inst.table[id];
            CHECK((!r.posterior_loss || *r.posterior_loss == 0.0 || *r.posterior_sim == 0.0));
        }
        const Partition one = divide_dataset(inst.table, inst.clusters, ThresholdStrategy::fixed(1.0),
                                             ThresholdStrategy::fixed(1.0));
        CHECK(one.positive.empty());
    }
}
