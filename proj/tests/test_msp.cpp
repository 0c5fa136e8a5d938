#include "helpers.hpp"

#include "tssd/error.hpp"
#include "tssd/msp.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace tssd;

namespace {

MetaDataset separable_set(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MetaDataset out;
    while (out.size() < n) {
        const double a = u(rng), b = u(rng);
        const double s = a + b - 1.0;
        if (std::abs(s) < 0.1) continue;  // margin 0.2 around the boundary
        out.push_back({{a, b}, s > 0.0 ? 1 : 0});
    }
    return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("meta records from the certain set") {
    ScoreTable t(6);
    for (std::size_t i = 0; i < 6; ++i) {
        t[i].posterior_loss = 0.1 * static_cast<double>(i) + 0.01;
        t[i].posterior_sim = 0.7 - 0.1 * static_cast<double>(i);
    }
    Partition p;
    p.num_samples = 6;
    p.positive = {0, 2, 4};
    p.negative = {1, 5};
    p.uncertain = {3};
    const MetaDataset m = build_meta_dataset(p, t);
    REQUIRE(m.size() == 5);
    std::vector<int> labels;
    for (const auto& r : m) labels.push_back(r.label);
    CHECK(labels == std::vector<int>{1, 1, 1, 0, 0});
    CHECK(m[1].input[0] == *t[2].posterior_loss);
    CHECK(m[1].input[1] == *t[2].posterior_sim);
    CHECK(m[4].input[0] == *t[5].posterior_loss);

    p.negative.clear();
    CHECK_THROWS_AS(build_meta_dataset(p, t), MetaStarved);
}

TEST_CASE("meta forward pass") {
    MetaNet zero(10);
    CHECK(meta_forward(zero, {0.3, 0.9}) == 0.5);
    MetaNet sat(10);
    sat.mlp().b2(0) = 30.0;
    CHECK(meta_forward(sat, {0.2, 0.4}) >= 1.0 - 1e-9);

    MetaNet one(1);
    one.mlp().w1(0, 0) = 1.0;
    one.mlp().w1(1, 0) = 0.0;
    one.mlp().b1(0) = 0.0;
    one.mlp().w2(0, 0) = 1.0;
    one.mlp().b2(0) = 0.0;
    const double oracle = sigmoid(1.0);
    CHECK(oracle == doctest::Approx(0.7310586).epsilon(1e-7));
    CHECK(meta_forward(one, {1.0, 0.0}) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("binary cross-entropy") {
    CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.9, 1) == doctest::Approx(0.1053605).epsilon(1e-6));
    CHECK(bce_loss(1.0 - 1e-7, 1) <= 2e-7);
    CHECK(std::isfinite(bce_loss(1.0, 0)));
    CHECK(std::isfinite(bce_loss(0.0, 1)));
}

TEST_CASE("meta training fits separable data") {
    const MetaDataset data = separable_set(200, 99);
    MetaTrainConfig cfg;
    cfg.seed = 3;
    // 30 epochs of 4 steps each leave the loss near 0.16; the sharp boundary needs a longer run.
    cfg.epochs = 100;
    cfg.patience = 100;
    MetaTrainHistory hist;
    const MetaNet trained = train_meta(MetaNet::random(cfg.hidden, cfg.seed), data, cfg, &hist);
    const double final_bce = meta_batch_loss(trained, data, {});
    CHECK(final_bce < 0.1);
    CHECK(final_bce == doctest::Approx(hist.full_bce[hist.best_epoch]).epsilon(1e-12));
    for (double b : hist.full_bce) CHECK(b >= final_bce - 1e-15);

    const MetaNet again = train_meta(MetaNet::random(cfg.hidden, cfg.seed), data, cfg);
    CHECK(again == trained);
}

TEST_CASE("meta training rejects bad configs") {
    const MetaDataset data = separable_set(20, 1);
    MetaTrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_meta(MetaNet::random(10, 0), data, cfg), InvalidSpec);
    cfg = {};
    cfg.lr = 0.0;
    CHECK_THROWS_AS(train_meta(MetaNet::random(10, 0), data, cfg), InvalidSpec);
    CHECK_THROWS_AS(train_meta(MetaNet::random(10, 0), MetaDataset{}, MetaTrainConfig{}), InvalidSpec);
}

TEST_CASE("meta training diverging raises a numerical failure") {
    const MetaDataset data = separable_set(50, 2);
    MetaTrainConfig cfg;
    cfg.lr = 1e300;
    CHECK_THROWS_AS(train_meta(MetaNet::random(10, 0), data, cfg), NumericalFailure);
}

TEST_CASE("weighted average baseline") {
    CHECK(weighted_average_baseline(0.8, 0.4, 1.0) == 0.8);
    CHECK(weighted_average_baseline(0.8, 0.4, 0.0) == 0.4);
    CHECK(weighted_average_baseline(0.8, 0.4, 0.5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(weighted_average_baseline(0.8, 0.4, 1.5), InvalidSpec);
}

TEST_CASE("purify the uncertain set") {
    ScoreTable t(4);
    t[2].fused = 0.9;
    t[3].fused = 0.2;
    Partition p;
    p.num_samples = 4;
    p.positive = {0};
    p.negative = {1};
    p.uncertain = {2, 3};
    const Partition q = purify(t, p, 0.5, 0.5);
    CHECK(q.purified);
    CHECK(q.clean_from_uncertain == std::vector<SampleId>{2});
    CHECK(q.noisy_from_uncertain == std::vector<SampleId>{3});
    CHECK(q.dropped.empty());
    CHECK(q.clean().size() + q.noisy().size() == 4);

    t[2].fused = 0.5;
    const Partition band = purify(t, p, 0.8, 0.2);
    CHECK(band.dropped == std::vector<SampleId>{2});
    CHECK_THROWS_AS(purify(t, p, 0.2, 0.8), InvalidSpec);

    t[3].fused.reset();
    CHECK(purify(t, p, 0.5, 0.5).dropped == std::vector<SampleId>{3});
}

TEST_CASE("fusion fills every scored sample") {
    ScoreTable t(3);
    t[0].posterior_loss = 0.2;
    t[0].posterior_sim = 0.9;
    t[2].posterior_loss = 0.7;
    t[2].posterior_sim = 0.6;
    fuse_scores(MetaNet::random(10, 4), t);
    CHECK(t[0].fused.has_value());
    CHECK_FALSE(t[1].fused.has_value());
    CHECK(*t[2].fused >= 0.0);
    CHECK(*t[2].fused <= 1.0);
    fuse_scores_weighted(t, 0.5);
    CHECK(*t[0].fused == doctest::Approx(0.55));
}

TEST_CASE("meta checkpoint round trip is exact") {
    const MetaNet net = MetaNet::random(10, 77);
    std::stringstream buf;
    save_meta_net(net, buf);
    CHECK(load_meta_net(buf) == net);

    std::stringstream junk;
    save_meta_net(net, junk);
    junk << "1.5\n";
    CHECK_THROWS(load_meta_net(junk));
    std::stringstream truncated("2 10 1\n0.5\n");
    CHECK_THROWS(load_meta_net(truncated));
}

TEST_CASE("meta training with default budget still improves on the initial net") {
    const MetaDataset data = separable_set(200, 99);
    const MetaTrainConfig cfg;
    const MetaNet init = MetaNet::random(cfg.hidden, 3);
    const MetaNet trained = train_meta(init, data, cfg);
    CHECK(meta_batch_loss(trained, data, {}) < 0.5 * meta_batch_loss(init, data, {}));
}
