#include "disgen/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "disgen/early_stop.hpp"
#include "disgen/error.hpp"
#include "disgen/tu_format.hpp"
#include "json.hpp"

namespace disgen {

BackboneConfig backbone_config(const RunConfig& config, std::size_t input_width) {
    BackboneConfig out;
    out.kind = config.backbone;
    out.layers = config.layers;
    out.hidden = config.hidden;
    out.input_width = input_width;
    return out;
}

HeadConfig head_config(const RunConfig& config, std::size_t num_classes) {
    HeadConfig out;
    out.backbone_width = config.hidden;
    out.hidden = config.enc_hidden;
    out.size_width = config.size_width;
    out.num_classes = num_classes;
    return out;
}

LossWeights loss_weights(const RunConfig& config) {
    LossWeights w;
    w.tau = config.tau;
    w.alpha1 = config.alpha1;
    w.alpha2 = config.alpha2;
    w.beta1 = config.beta1;
    w.beta2 = config.beta2;
    w.beta3 = config.beta3;
    w.ridge = config.ridge;
    w.epsilon = config.epsilon;
    return w;
}

Tensor TrainedModel::logits(std::span<const GraphRecord> graphs) const {
    return task_logits(params, backbone, heads, graphs);
}

std::vector<std::size_t> TrainedModel::predict(std::span<const GraphRecord> graphs) const {
    const Tensor l = logits(graphs);
    std::vector<std::size_t> out(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        out[i] = prediction_from_logits(l.values().subspan(i * l.cols(), l.cols())).label;
    }
    return out;
}

double task_cross_entropy(const TrainedModel& model, std::span<const GraphRecord> graphs) {
    if (graphs.empty()) throw ContractError("task_cross_entropy: empty graph set");
    const Tensor probs = softmax_rows(model.logits(graphs));
    double total = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i) total -= std::log(probs(i, graphs[i].label));
    return total / static_cast<double>(graphs.size());
}

double macro_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted, std::size_t num_classes) {
    if (truth.size() != predicted.size()) throw ContractError("macro_f1: label and prediction counts differ");
    if (num_classes == 0) throw ContractError("macro_f1: no classes");
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (predicted[i] == c && truth[i] == c) ++tp;
            else if (predicted[i] == c) ++fp;
            else if (truth[i] == c) ++fn;
        }
        const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
    }
    return sum / static_cast<double>(num_classes);
}

double evaluate_f1(const TrainedModel& model, std::span<const GraphRecord> graphs) {
    if (graphs.empty()) throw ContractError("evaluate_f1: empty evaluation set");
    std::vector<std::size_t> truth;
    truth.reserve(graphs.size());
    for (const auto& g : graphs) truth.push_back(g.label);
    return macro_f1(truth, model.predict(graphs), model.heads.num_classes);
}

namespace {

void warm_start_backbone(ParameterSet& params, const PretrainedModel& pretrained, const BackboneConfig& config) {
    if (!(pretrained.config == config)) {
        throw ConfigError("warm_start: pretrained backbone (" + to_string(pretrained.config.kind) + ", " +
                          std::to_string(pretrained.config.layers) + " layers, width " +
                          std::to_string(pretrained.config.hidden) + ") differs from the training backbone");
    }
    for (const auto& [path, entry] : pretrained.params.entries()) {
        if (path.rfind("backbone.", 0) == 0) params.mutable_at(path) = entry.value;
    }
}

LossBreakdown scaled(const LossBreakdown& sum, double count) {
    LossBreakdown out = sum;
    out.size_loss /= count;
    out.task_loss /= count;
    out.decoupling_loss /= count;
    out.residual /= count;
    out.total /= count;
    return out;
}

}  // namespace

TrainOutcome train_disgen(std::span<const ViewTriple> triples, std::span<const GraphRecord> validation,
                          std::size_t num_classes, const RunConfig& config, const PretrainedModel* warm_start) {
    if (triples.empty()) throw ContractError("train_disgen: no training triples");
    validate(config);
    const auto started = std::chrono::steady_clock::now();

    TrainOutcome out;
    TrainedModel& model = out.model;
    model.backbone = backbone_config(config, triples.front().original.feature_width());
    model.heads = head_config(config, num_classes);

    Rng init_rng(config.seed);
    model.params = init_backbone(model.backbone, init_rng);
    model.params.merge(init_heads(model.heads, init_rng));
    if (config.warm_start && warm_start) warm_start_backbone(model.params, *warm_start, model.backbone);

    const LossWeights weights = loss_weights(config);
    AdamConfig adam;
    adam.learning_rate = config.learning_rate;

    MetricsReport& report = out.report;
    report.seed = config.seed;
    report.config_hash = config_hash(config);

    Rng order_rng(config.seed ^ 0x5eedULL);
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> validation_history;
    std::vector<LossBreakdown> epoch_means;
    ParameterSet best = model.params;

    for (std::size_t epoch = 0; epoch < config.max_epochs && !report.aborted; ++epoch) {
        order_rng.shuffle(order);
        LossBreakdown sum;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const ViewTriple*> members;
            for (std::size_t i = start; i < end; ++i) members.push_back(&triples[order[i]]);
            const GraphBatch batch = assemble_batch(std::span<const ViewTriple* const>(members));

            Tape tape;
            const Objective objective = disgen_objective(tape, model.params, model.backbone, model.heads, batch, weights);
            const LossBreakdown& b = objective.breakdown;
            if (!std::isfinite(b.total)) {
                report.aborted = true;
                report.diagnostic = "non-finite objective at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(report.steps.size()) + " (L_s=" + format_real(b.size_loss) +
                                    " L_t=" + format_real(b.task_loss) + " L_d=" + format_real(b.decoupling_loss) +
                                    ")";
                break;
            }
            report.steps.push_back(b);
            report.zero_norm_size_rows += b.zero_norm_size_rows;
            const double w = static_cast<double>(end - start);
            sum.size_loss += w * b.size_loss;
            sum.task_loss += w * b.task_loss;
            sum.decoupling_loss += w * b.decoupling_loss;
            sum.residual += w * b.residual;
            sum.total += w * b.total;
            adam_step(model.params, tape.backward(objective.total), adam);
        }
        if (report.aborted) break;

        LossBreakdown mean = scaled(sum, static_cast<double>(triples.size()));
        mean.beta1 = weights.beta1;
        mean.beta2 = weights.beta2;
        mean.beta3 = weights.beta3;
        epoch_means.push_back(mean);

        EpochRecord record;
        record.epoch = epoch;
        record.train_total = mean.total;
        record.train_size_loss = mean.size_loss;
        record.train_task_loss = mean.task_loss;
        record.train_decoupling_loss = mean.decoupling_loss;
        record.train_residual = mean.residual;
        record.validation_loss = validation.empty() ? mean.total : task_cross_entropy(model, validation);
        if (!std::isfinite(record.validation_loss)) {
            report.aborted = true;
            report.diagnostic = "non-finite validation loss at epoch " + std::to_string(epoch);
            break;
        }
        report.epochs.push_back(record);
        validation_history.push_back(record.validation_loss);

        const EarlyStopDecision decision = early_stop_check(validation_history, config.patience);
        if (decision.best_epoch + 1 == validation_history.size()) best = model.params;
        report.best_epoch = decision.best_epoch;
        if (decision.stop) break;
    }

    if (!epoch_means.empty()) report.best_breakdown = epoch_means[report.best_epoch];
    if (!report.epochs.empty()) model.params = best;
    model.params.freeze();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

std::string metrics_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["config_hash"] = std::to_string(r.config_hash);
    j["small_test_f1"] = r.small_test_f1;
    j["large_test_f1"] = r.large_test_f1;
    j["best_epoch"] = r.best_epoch;
    j["epochs_run"] = r.epochs.size();
    j["steps"] = r.steps.size();
    const LossBreakdown& b = r.best_breakdown;
    j["loss_breakdown"] = {{"L_s", b.size_loss},   {"L_t", b.task_loss}, {"L_d", b.decoupling_loss},
                           {"D", b.residual},      {"total", b.total},   {"beta1", b.beta1},
                           {"beta2", b.beta2},     {"beta3", b.beta3}};
    auto train = nlohmann::ordered_json::array();
    auto val = nlohmann::ordered_json::array();
    for (const auto& e : r.epochs) {
        train.push_back(e.train_total);
        val.push_back(e.validation_loss);
    }
    j["train_losses"] = train;
    j["validation_losses"] = val;
    j["zero_norm_size_rows"] = r.zero_norm_size_rows;
    j["aborted"] = r.aborted;
    j["diagnostic"] = r.diagnostic;
    return j.dump(2) + "\n";
}

void write_losses_csv(const std::filesystem::path& path, std::span<const LossBreakdown> steps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "step,L_s,L_t,L_d,D,total\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& s = steps[i];
        out << i << ',' << format_real(s.size_loss) << ',' << format_real(s.task_loss) << ','
            << format_real(s.decoupling_loss) << ',' << format_real(s.residual) << ',' << format_real(s.total) << '\n';
    }
}

void write_run_outputs(const std::filesystem::path& dir, const RunConfig& config, const MetricsReport& report) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw FormatError("cannot write " + (dir / name).string());
        out << text;
    };
    write("config.json", to_config_json(config));
    write("metrics.json", metrics_json(report));

    std::string epochs = "epoch,train_total,L_s,L_t,L_d,D,validation_loss\n";
    for (const auto& e : report.epochs) {
        epochs += std::to_string(e.epoch) + "," + format_real(e.train_total) + "," + format_real(e.train_size_loss) +
                  "," + format_real(e.train_task_loss) + "," + format_real(e.train_decoupling_loss) + "," +
                  format_real(e.train_residual) + "," + format_real(e.validation_loss) + "\n";
    }
    write("epochs.csv", epochs);
    write_losses_csv(dir / "losses.csv", report.steps);

    nlohmann::ordered_json timing;
    timing["wall_seconds"] = report.wall_seconds;
    write("timing.json", timing.dump(2) + "\n");
}

}  // namespace disgen
