#include "disgen/pipeline.hpp"

#include "disgen/error.hpp"

namespace disgen {

std::vector<GraphRecord> gather(std::span<const GraphRecord> graphs, std::span<const std::int64_t> ids) {
    std::vector<GraphRecord> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(graph_by_id(graphs, id));
    return out;
}

std::vector<std::int64_t> upsampled_train_ids(std::span<const GraphRecord> graphs, const DatasetSplit& split,
                                              const RunConfig& config, std::vector<std::string>* warnings) {
    std::vector<std::int64_t> ids = split.train;
    for (std::size_t k = 0; k < config.upsample.size(); ++k) {
        const auto [cls, ratio] = config.upsample[k];
        UpsampleResult r = upsample_class(ids, graphs, cls, ratio, config.seed + 1000 + k);
        if (warnings) warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
        ids = std::move(r.ids);
    }
    return ids;
}

PretrainOptions pretrain_options(const RunConfig& config) {
    PretrainOptions o;
    o.epochs = config.pretrain_epochs;
    o.patience = config.pretrain_patience;
    o.batch_size = config.batch_size;
    o.learning_rate = config.learning_rate;
    o.seed = config.seed + 17;
    return o;
}

PreparedRun prepare_run(std::span<const GraphRecord> graphs, const DatasetSplit& split, std::size_t num_classes,
                        const RunConfig& config) {
    if (graphs.empty()) throw ContractError("prepare_run: empty dataset");
    PreparedRun run;
    run.num_classes = num_classes;
    run.train = gather(graphs, upsampled_train_ids(graphs, split, config));
    run.validation = gather(graphs, split.validation);
    run.small_test = gather(graphs, split.small_test);
    run.large_test = gather(graphs, split.large_test);

    BackboneConfig explainer = backbone_config(config, graphs.front().feature_width());
    explainer.kind = config.explainer_backbone;
    run.explainer_model = pretrain_backbone(run.train, run.validation, explainer, num_classes,
                                            pretrain_options(config), train_fingerprint(split.train));

    AugmentOptions aug;
    aug.k1_fraction = config.k1_fraction;
    aug.k2_fraction = config.k2_fraction;
    const OcclusionExplainer occlusion(run.explainer_model);
    run.triples = augment_graphs(run.train, occlusion, run.explainer_model, aug);
    return run;
}

TrainOutcome fit_and_evaluate(const PreparedRun& run, const RunConfig& config) {
    TrainOutcome out = train_disgen(run.triples, run.validation, run.num_classes, config, &run.explainer_model);
    if (!run.small_test.empty()) out.report.small_test_f1 = evaluate_f1(out.model, run.small_test);
    if (!run.large_test.empty()) out.report.large_test_f1 = evaluate_f1(out.model, run.large_test);
    return out;
}

RunConfig baseline_of(const RunConfig& config) {
    RunConfig out = config;
    out.beta1 = 0.0;
    out.beta3 = 0.0;
    return out;
}

SizeShiftComparison run_size_shift_comparison(const RunConfig& config, const SizeShiftOptions& options,
                                              std::uint64_t seed) {
    RunConfig seeded = config;
    seeded.seed = seed;
    const auto graphs = make_size_shift_dataset(options, seed);
    const DatasetSplit split = split_by_size(graphs, seed, seeded.split);
    const PreparedRun run = prepare_run(graphs, split, 2, seeded);

    SizeShiftComparison out;
    out.seed = seed;
    out.baseline = fit_and_evaluate(run, baseline_of(seeded)).report;
    out.disgen = fit_and_evaluate(run, seeded).report;
    out.baseline_small_f1 = out.baseline.small_test_f1;
    out.baseline_large_f1 = out.baseline.large_test_f1;
    out.disgen_small_f1 = out.disgen.small_test_f1;
    out.disgen_large_f1 = out.disgen.large_test_f1;
    return out;
}

}  // namespace disgen
