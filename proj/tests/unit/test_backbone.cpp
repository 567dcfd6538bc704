#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "disgen/backbone.hpp"
#include "disgen/batch.hpp"
#include "disgen/error.hpp"
#include "disgen/gradcheck.hpp"
#include "disgen/synth.hpp"
#include "test_support.hpp"

using namespace disgen;
using namespace disgen::testing;

namespace {

std::shared_ptr<const BlockDiagonal> single_block(Tensor t) {
    return std::make_shared<BlockDiagonal>(std::vector<Tensor>{std::move(t)});
}

Tensor pooled(const ParameterSet& params, const BackboneConfig& config, std::vector<GraphRecord> graphs) {
    const GraphBatch batch = assemble_graphs(std::move(graphs));
    Tape tape;
    return mean_pool(backbone_nodes(tape, params, config, batch), batch).value();
}

BackboneConfig small_config(BackboneKind kind, std::size_t width) {
    BackboneConfig c;
    c.kind = kind;
    c.layers = 2;
    c.hidden = 5;
    c.input_width = width;
    return c;
}

}  // namespace

TEST(GcnLayer, IdentityPropagationAndWeights) {
    Rng rng(1);
    Tensor h = random_tensor(4, 3, rng);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::abs(h[i]);
    Tape tape;
    const Var out = gcn_layer(tape.constant(h), single_block(Tensor::identity(4)), tape.constant(Tensor::identity(3)),
                              std::nullopt, true);
    EXPECT_EQ(out.value(), h);
}

TEST(GcnLayer, IdentityAdjacencyIsDenseLayer) {
    Rng rng(2);
    const Tensor h = random_tensor(3, 4, rng), w = random_tensor(4, 2, rng), b = random_tensor(1, 2, rng);
    Tape tape;
    const Var out = gcn_layer(tape.constant(h), single_block(Tensor::identity(3)), tape.constant(w), tape.constant(b), true);
    Tensor want = matmul(h, w);
    for (std::size_t i = 0; i < want.rows(); ++i)
        for (std::size_t j = 0; j < want.cols(); ++j) want(i, j) = std::max(0.0, want(i, j) + b(0, j));
    EXPECT_EQ(out.value(), want);
}

TEST(GcnLayer, TwoNodeCliqueStaysSymmetric) {
    Rng rng(3);
    const BackboneConfig config = small_config(BackboneKind::GCN, 2);
    const ParameterSet params = init_backbone(config, rng);
    const GraphRecord g = make_graph(0, Tensor(2, 2, 0.7), {{0, 1}}, 0);
    const GraphBatch batch = assemble_graphs({g});
    Tape tape;
    const Tensor nodes = backbone_nodes(tape, params, config, batch).value();
    for (std::size_t j = 0; j < nodes.cols(); ++j) EXPECT_EQ(nodes(0, j), nodes(1, j));
}

TEST(GcnLayer, SingleNodeReducesToDense) {
    Rng rng(4);
    const Tensor h = random_tensor(1, 3, rng), w = random_tensor(3, 3, rng);
    Tape tape;
    const Var out = gcn_layer(tape.constant(h), single_block(normalize_adjacency(plain_graph(1, {}))), tape.constant(w),
                              std::nullopt, true);
    Tensor want = matmul(h, w);
    for (std::size_t i = 0; i < want.size(); ++i) want[i] = std::max(0.0, want[i]);
    EXPECT_EQ(out.value(), want);
}

TEST(GinLayer, EdgelessAppliesMlpPerNode) {
    Rng rng(5);
    const Tensor h = random_tensor(3, 2, rng);
    const Tensor w1 = random_tensor(2, 4, rng), b1 = random_tensor(1, 4, rng);
    const Tensor w2 = random_tensor(4, 2, rng), b2 = random_tensor(1, 2, rng);
    Tape tape;
    const GinWeights weights{tape.constant(w1), tape.constant(b1), tape.constant(w2), tape.constant(b2),
                             tape.constant(Tensor::scalar(0.0))};
    const Tensor out = gin_layer(tape.constant(h), single_block(Tensor(3, 3)), weights, false).value();
    for (std::size_t v = 0; v < 3; ++v) {
        for (std::size_t j = 0; j < 2; ++j) {
            double want = b2(0, j);
            for (std::size_t k = 0; k < 4; ++k) {
                double hidden = b1(0, k);
                for (std::size_t i = 0; i < 2; ++i) hidden += h(v, i) * w1(i, k);
                want += std::max(0.0, hidden) * w2(k, j);
            }
            EXPECT_NEAR(out(v, j), want, 1e-14);
        }
    }
}

TEST(GinLayer, EpsilonMinusOneZeroesEdgelessInput) {
    Rng rng(6);
    Tape tape;
    const GinWeights weights{tape.constant(Tensor::identity(2)), tape.constant(Tensor(1, 2)),
                             tape.constant(Tensor::identity(2)), tape.constant(Tensor(1, 2)),
                             tape.constant(Tensor::scalar(-1.0))};
    const Tensor out = gin_layer(tape.constant(random_tensor(3, 2, rng)), single_block(Tensor(3, 3)), weights, false).value();
    EXPECT_EQ(out, Tensor(3, 2, 0.0));
}

TEST(GinLayer, PathSumsNeighbours) {
    const Tensor h = Tensor::from_rows({{1.0, 2.0}, {3.0, 0.5}});
    Tape tape;
    const GinWeights weights{tape.constant(Tensor::identity(2)), tape.constant(Tensor(1, 2)),
                             tape.constant(Tensor::identity(2)), tape.constant(Tensor(1, 2)),
                             tape.constant(Tensor::scalar(0.0))};
    const Tensor out =
        gin_layer(tape.constant(h), single_block(adjacency_matrix(plain_graph(2, {{0, 1}}))), weights, false).value();
    EXPECT_EQ(out(0, 0), 4.0);
    EXPECT_EQ(out(0, 1), 2.5);
}

TEST(MeanPool, ConstantRowsAndMidpoint) {
    const GraphBatch batch = assemble_graphs({plain_graph(3, {}), plain_graph(2, {{0, 1}})});
    Tape tape;
    const Tensor nodes = Tensor::from_rows({{2, 5}, {2, 5}, {2, 5}, {1, 0}, {0, 1}});
    const Tensor p = mean_pool(tape.constant(nodes), batch).value();
    EXPECT_EQ(p, Tensor::from_rows({{2, 5}, {0.5, 0.5}}));
}

TEST(MeanPool, BatchedEqualsIndependent) {
    for (BackboneKind kind : {BackboneKind::GCN, BackboneKind::GIN}) {
        Rng rng(7);
        const BackboneConfig config = small_config(kind, 3);
        const ParameterSet params = init_backbone(config, rng);
        std::vector<GraphRecord> graphs;
        for (int k = 0; k < 5; ++k) graphs.push_back(random_graph(3 + rng.index(6), 0.4, 3, rng));
        const Tensor together = pooled(params, config, graphs);
        for (std::size_t k = 0; k < graphs.size(); ++k) {
            const Tensor alone = pooled(params, config, {graphs[k]});
            for (std::size_t j = 0; j < alone.cols(); ++j) EXPECT_NEAR(together(k, j), alone(0, j), 1e-12);
        }
    }
}

TEST(Backbone, PermutationInvariantPooling) {
    for (BackboneKind kind : {BackboneKind::GCN, BackboneKind::GIN}) {
        Rng rng(8);
        const BackboneConfig config = small_config(kind, 2);
        ParameterSet params = init_backbone(config, rng);
        for (int k = 0; k < 10; ++k) {
            const GraphRecord g = random_graph(4 + rng.index(8), 0.35, 2, rng);
            std::vector<std::size_t> perm(g.num_nodes());
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            const Tensor a = pooled(params, config, {g}), b = pooled(params, config, {permute_nodes(g, perm)});
            EXPECT_LT(max_abs_diff(a, b), 1e-9);
        }
    }
}

TEST(Backbone, PretrainLossGradcheck) {
    for (BackboneKind kind : {BackboneKind::GCN, BackboneKind::GIN}) {
        Rng rng(9);
        const BackboneConfig config = small_config(kind, 2);
        ParameterSet params = init_backbone(config, rng);
        params.add("head.weight", glorot_uniform(config.hidden, 2, rng));
        params.add("head.bias", random_tensor(1, 2, rng, 0.1));
        // Zero biases put relu inputs exactly on the kink; move off it.
        std::vector<std::string> paths;
        for (const auto& [path, entry] : params.entries()) paths.push_back(path);
        for (const auto& path : paths) {
            Tensor& t = params.mutable_at(path);
            t += random_tensor(t.rows(), t.cols(), rng, 0.1);
        }
        std::vector<GraphRecord> graphs;
        for (int k = 0; k < 4; ++k) graphs.push_back(random_graph(4 + k, 0.5, 2, rng, k % 2));
        const GraphBatch batch = assemble_graphs(graphs);
        const auto report = finite_diff_check(
            [&](Tape& t, const ParameterSet& p) { return pretrain_loss(t, p, config, batch); }, params, 1e-5, 1e-4);
        EXPECT_TRUE(report.passed()) << to_string(kind) << " worst " << report.worst << " at "
                                     << report.worst_parameter;
    }
}

TEST(Prediction, TieGoesToLowerClass) {
    const std::vector<double> logits{2.0, 2.0};
    const Prediction p = prediction_from_logits(logits);
    EXPECT_EQ(p.label, 0u);
    EXPECT_EQ(p.probabilities, (std::vector<double>{0.5, 0.5}));
}

TEST(Prediction, SoftmaxByHand) {
    const std::vector<double> logits{0.0, 10.0};
    const Prediction p = prediction_from_logits(logits);
    EXPECT_EQ(p.label, 1u);
    const double e = std::exp(-10.0);
    EXPECT_NEAR(p.probabilities[0], e / (1 + e), 1e-15);
    EXPECT_NEAR(p.probabilities[0], 4.54e-5, 1e-7);
    EXPECT_NEAR(p.probabilities[1], 1 / (1 + e), 1e-15);
}

namespace {

struct MotifData {
    std::vector<GraphRecord> train, validation;
};

MotifData motif_data() {
    SizeShiftOptions o;
    o.per_class = 30;
    o.small0_min = o.small1_min = 10;
    o.small0_max = o.small1_max = 18;
    o.large_min = 20;
    o.large_max = 26;
    auto graphs = make_size_shift_dataset(o, 3);
    MotifData d;
    for (std::size_t i = 0; i < graphs.size(); ++i) (i % 5 == 4 ? d.validation : d.train).push_back(graphs[i]);
    return d;
}

}  // namespace

TEST(Pretrain, SeparableMotifReachesHighTrainAccuracy) {
    const MotifData d = motif_data();
    BackboneConfig config;
    config.hidden = 16;
    config.input_width = kSizeShiftFeatureWidth;
    PretrainOptions options;
    options.epochs = 200;
    options.patience = 200;
    options.learning_rate = 1e-2;
    options.seed = 1;
    const PretrainedModel model = pretrain_backbone(d.train, {}, config, 2, options, 0);
    std::size_t correct = 0;
    for (const auto& g : d.train) correct += predict_label(model, g).label == g.label;
    EXPECT_GE(static_cast<double>(correct) / d.train.size(), 0.95);
    EXPECT_TRUE(model.params.frozen());
}

TEST(Pretrain, ZeroEpochsFreezesInitialisation) {
    const MotifData d = motif_data();
    BackboneConfig config = small_config(BackboneKind::GCN, kSizeShiftFeatureWidth);
    PretrainOptions options;
    options.epochs = 0;
    options.seed = 5;
    const PretrainedModel model = pretrain_backbone(d.train, d.validation, config, 2, options, 0);
    EXPECT_TRUE(model.params.frozen());
    EXPECT_TRUE(model.train_losses.empty());
    Rng rng(5);
    ParameterSet init = init_backbone(config, rng);
    init.add("head.weight", glorot_uniform(config.hidden, 2, rng));
    init.add("head.bias", Tensor(1, 2));
    EXPECT_EQ(model.params.checksum(), init.checksum());
}

TEST(Pretrain, DeterministicPerSeed) {
    const MotifData d = motif_data();
    BackboneConfig config = small_config(BackboneKind::GIN, kSizeShiftFeatureWidth);
    PretrainOptions options;
    options.epochs = 5;
    options.seed = 2;
    const auto a = pretrain_backbone(d.train, d.validation, config, 2, options, 0);
    const auto b = pretrain_backbone(d.train, d.validation, config, 2, options, 0);
    EXPECT_EQ(a.params.checksum(), b.params.checksum());
    EXPECT_EQ(a.validation_losses, b.validation_losses);
}

TEST(Pretrain, PredictionInvariantUnderReindexing) {
    const MotifData d = motif_data();
    BackboneConfig config = small_config(BackboneKind::GCN, kSizeShiftFeatureWidth);
    PretrainOptions options;
    options.epochs = 3;
    const auto model = pretrain_backbone(d.train, d.validation, config, 2, options, 0);
    Rng rng(4);
    for (const auto& g : d.validation) {
        std::vector<std::size_t> perm(g.num_nodes());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        const auto a = predict_label(model, g), b = predict_label(model, permute_nodes(g, perm));
        EXPECT_EQ(a.label, b.label);
        EXPECT_NEAR(a.probabilities[1], b.probabilities[1], 1e-12);
    }
}

TEST(Checkpoint, RoundTripAndFingerprintGate) {
    const MotifData d = motif_data();
    BackboneConfig config = small_config(BackboneKind::GIN, kSizeShiftFeatureWidth);
    PretrainOptions options;
    options.epochs = 2;
    const auto model = pretrain_backbone(d.train, d.validation, config, 2, options, 1234);
    const auto path = scratch_dir("ckpt") / "model.ckpt";
    save_checkpoint(path, model);
    const auto loaded = load_checkpoint(path, 1234);
    EXPECT_EQ(loaded.params.checksum(), model.params.checksum());
    EXPECT_EQ(loaded.config, model.config);
    EXPECT_THROW(load_checkpoint(path, 99), FingerprintError);
    EXPECT_NO_THROW(load_checkpoint(path, 99, true));
    EXPECT_THROW(load_checkpoint(path.parent_path() / "absent.ckpt"), MissingDependencyError);
}
