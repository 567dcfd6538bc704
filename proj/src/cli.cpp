#include "disgen/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "disgen/artifacts.hpp"
#include "disgen/config.hpp"
#include "disgen/error.hpp"
#include "disgen/explainer.hpp"
#include "disgen/pipeline.hpp"
#include "disgen/synth.hpp"
#include "disgen/theorylab.hpp"
#include "disgen/tu_format.hpp"
#include "json.hpp"

namespace disgen {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Context {
    const CommandSpec& spec;
    RunConfig config;
    std::ostream& log;
    CommandResult result;

    void say(const std::string& line) const {
        if (spec.verbose) log << "[" << spec.subcommand << "] " << line << '\n';
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
}

Json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingDependencyError("artifact not found: " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void require(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path)) {
        throw MissingDependencyError(path.string() + " not found; run '" + producer + "' first");
    }
}

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

/// `<parent>/<timestamp>-seed<N>`, suffixed -1, -2, ... if taken.
fs::path fresh_run_dir(const fs::path& parent, std::uint64_t seed) {
    const std::string base = utc_stamp() + "-seed" + std::to_string(seed);
    fs::path dir = parent / base;
    for (int k = 1; fs::exists(dir); ++k) dir = parent / (base + "-" + std::to_string(k));
    fs::create_directories(dir);
    return dir;
}

/// Config echo plus manifest, written before the stage computes anything.
void write_preamble(const Context& ctx, const fs::path& dir, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    write_text(dir / "config.json", to_config_json(ctx.config));
    Json m;
    m["manifest_version"] = kManifestVersion;
    m["tool"] = "disgen";
    m["tool_version"] = kToolVersion;
    m["subcommand"] = ctx.spec.subcommand;
    m["seed"] = ctx.config.seed;
    m["config_hash"] = std::to_string(config_hash(ctx.config));
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void stage_preamble(const Context& ctx, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    write_preamble(ctx, ctx.spec.out / "manifests" / ctx.spec.subcommand, inputs, outputs);
}

// Workspace access ----------------------------------------------------------

fs::path resolve_dataset_dir(const RunConfig& c) {
    if (c.dataset_name.empty()) throw ConfigError("dataset_name must be set for ingest");
    std::vector<fs::path> candidates;
    if (!c.dataset_path.empty()) candidates.emplace_back(c.dataset_path);
    if (const char* root = std::getenv("DISGEN_DATA_DIR"); root && *root) {
        if (!c.dataset_path.empty() && fs::path(c.dataset_path).is_relative()) {
            candidates.push_back(fs::path(root) / c.dataset_path);
        }
        candidates.push_back(fs::path(root) / c.dataset_name);
        candidates.emplace_back(root);
    }
    std::string tried;
    for (const auto& dir : candidates) {
        if (fs::exists(dir / (c.dataset_name + "_A.txt"))) return dir;
        tried += (tried.empty() ? "" : ", ") + dir.string();
    }
    throw MissingDependencyError("dataset '" + c.dataset_name + "' not found" +
                                 (tried.empty() ? " (set dataset_path or DISGEN_DATA_DIR)" : " in " + tried));
}

TuDataset load_workspace_dataset(const fs::path& out) {
    require(out / "dataset" / "info.json", "ingest");
    const Json info = read_json(out / "dataset" / "info.json");
    return parse_tu_dataset(out / "dataset", info.at("name").get<std::string>());
}

DatasetSplit load_workspace_split(const fs::path& out) {
    require(out / "split.txt", "split");
    return read_split(out / "split.txt");
}

PretrainedModel load_workspace_model(const fs::path& out, const DatasetSplit& split) {
    require(out / "explainer.ckpt", "pretrain");
    return load_checkpoint(out / "explainer.ckpt", train_fingerprint(split.train));
}

// Stages ---------------------------------------------------------------------

void cmd_ingest(Context& ctx) {
    stage_preamble(ctx, {"dataset_path"}, {"dataset/"});
    const fs::path src = resolve_dataset_dir(ctx.config);
    ctx.say("reading " + ctx.config.dataset_name + " from " + src.string());
    const TuDataset data = parse_tu_dataset(src, ctx.config.dataset_name);
    const fs::path dst = ctx.spec.out / "dataset";
    fs::create_directories(dst);
    write_tu_dataset(dst, data);

    std::vector<std::size_t> per_class(data.num_classes(), 0);
    std::size_t nodes = 0, edges = 0;
    for (const auto& g : data.graphs) {
        ++per_class[g.label];
        nodes += g.num_nodes();
        edges += g.num_edges();
    }
    Json info;
    info["name"] = data.name;
    info["graphs"] = data.graphs.size();
    info["classes"] = data.num_classes();
    info["graph_label_values"] = data.graph_label_values;
    info["graphs_per_class"] = per_class;
    info["feature_width"] = data.feature_width();
    info["nodes"] = nodes;
    info["edges"] = edges;
    write_text(dst / "info.json", info.dump(2) + "\n");
    ctx.say(std::to_string(data.graphs.size()) + " graphs, " + std::to_string(data.num_classes()) + " classes");
}

void cmd_split(Context& ctx) {
    stage_preamble(ctx, {"dataset/"}, {"split.txt"});
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = split_by_size(data.graphs, ctx.config.seed, ctx.config.split);
    write_split(ctx.spec.out / "split.txt", split);
    ctx.say("train " + std::to_string(split.train.size()) + ", validation " + std::to_string(split.validation.size()) +
            ", small test " + std::to_string(split.small_test.size()) + ", large test " +
            std::to_string(split.large_test.size()));
}

void cmd_pretrain(Context& ctx) {
    stage_preamble(ctx, {"dataset/", "split.txt"}, {"explainer.ckpt"});
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = load_workspace_split(ctx.spec.out);
    std::vector<std::string> warnings;
    const auto train = gather(data.graphs, upsampled_train_ids(data.graphs, split, ctx.config, &warnings));
    for (const auto& w : warnings) ctx.say("warning: " + w);
    const auto validation = gather(data.graphs, split.validation);
    BackboneConfig bc = backbone_config(ctx.config, data.feature_width());
    bc.kind = ctx.config.explainer_backbone;
    const PretrainedModel model = pretrain_backbone(train, validation, bc, data.num_classes(),
                                                    pretrain_options(ctx.config), train_fingerprint(split.train));
    save_checkpoint(ctx.spec.out / "explainer.ckpt", model);
    ctx.say("best epoch " + std::to_string(model.best_epoch) + " of " + std::to_string(model.train_losses.size()));
}

void cmd_explain(Context& ctx) {
    stage_preamble(ctx, {"dataset/", "split.txt", "explainer.ckpt"}, {"importance.csv"});
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = load_workspace_split(ctx.spec.out);
    const PretrainedModel model = load_workspace_model(ctx.spec.out, split);
    const auto graphs = gather(data.graphs, split.train);
    const fs::path cache = ctx.spec.out / "importance.csv";

    if (ctx.spec.use_cache) {
        if (const auto cached = read_importance_cache(cache, model.fingerprint)) {
            const bool complete = std::all_of(graphs.begin(), graphs.end(), [&](const GraphRecord& g) {
                const auto it = cached->find(g.id);
                return g.num_edges() == 0 ? it == cached->end() : it != cached->end() && it->second.size() == g.num_edges();
            });
            if (complete) {
                ctx.say("reusing cached importances");
                return;
            }
        }
        ctx.say("cache missing or stale; recomputing");
    }
    const OcclusionExplainer explainer(model);
    std::vector<EdgeImportance> importances;
    importances.reserve(graphs.size());
    for (const auto& g : graphs) importances.push_back(explainer.explain(g));
    write_importance_cache(cache, model.fingerprint, importances, graphs);
    ctx.say("explained " + std::to_string(graphs.size()) + " graphs");
}

void cmd_augment(Context& ctx) {
    stage_preamble(ctx, {"dataset/", "split.txt", "explainer.ckpt", "importance.csv"},
                   {"triples.txt", "audit.csv", "views/"});
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = load_workspace_split(ctx.spec.out);
    const PretrainedModel model = load_workspace_model(ctx.spec.out, split);
    require(ctx.spec.out / "importance.csv", "explain");
    const auto cache = read_importance_cache(ctx.spec.out / "importance.csv", model.fingerprint);
    if (!cache) throw MissingDependencyError("importance.csv was written for another model; run 'explain' again");

    AugmentOptions options;
    options.k1_fraction = ctx.config.k1_fraction;
    options.k2_fraction = ctx.config.k2_fraction;
    const auto train = gather(data.graphs, upsampled_train_ids(data.graphs, split, ctx.config));
    std::vector<ViewTriple> triples;
    triples.reserve(train.size());
    for (const auto& g : train) {
        const auto it = cache->find(g.id);
        const std::vector<double> scores = it == cache->end() ? std::vector<double>{} : it->second;
        if (scores.size() != g.num_edges()) {
            throw MissingDependencyError("importance.csv lacks scores for graph " + std::to_string(g.id) +
                                         "; run 'explain' again");
        }
        triples.push_back(make_triple(g, importance_from_edge_scores(g, scores, model.fingerprint), model, options));
    }
    write_triples(ctx.spec.out / "triples.txt", triples);
    write_audit_csv(ctx.spec.out / "audit.csv", triples);

    std::vector<GraphRecord> g1, g2;
    for (const auto& t : triples) {
        g1.push_back(t.size_invariant);
        g2.push_back(t.task_invariant);
    }
    write_tu_dataset(ctx.spec.out / "views", with_graphs(data, data.name + "_G1", std::move(g1)));
    write_tu_dataset(ctx.spec.out / "views", with_graphs(data, data.name + "_G2", std::move(g2)));
    const auto failed = std::count_if(triples.begin(), triples.end(), [](const ViewTriple& t) { return !t.audit.passed; });
    ctx.say(std::to_string(triples.size()) + " triples, " + std::to_string(failed) + " failed the label check");
}

void cmd_train(Context& ctx) {
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = load_workspace_split(ctx.spec.out);
    require(ctx.spec.out / "triples.txt", "augment");
    const std::vector<ViewTriple> triples = read_triples(ctx.spec.out / "triples.txt");
    const std::set<std::int64_t> train_ids(split.train.begin(), split.train.end());
    for (const auto& t : triples) {
        if (!train_ids.count(t.original.id)) {
            throw MissingDependencyError("triples.txt does not match split.txt (graph " +
                                         std::to_string(t.original.id) + "); run 'augment' again");
        }
    }
    std::optional<PretrainedModel> warm;
    if (ctx.config.warm_start) warm = load_workspace_model(ctx.spec.out, split);

    const fs::path dir = fresh_run_dir(ctx.spec.out / "runs", ctx.config.seed);
    ctx.result.artifact_dir = dir;
    write_preamble(ctx, dir, {"dataset/", "split.txt", "triples.txt"},
                   {"metrics.json", "epochs.csv", "losses.csv", "model.txt", "timing.json"});

    PreparedRun run;
    run.num_classes = data.num_classes();
    run.validation = gather(data.graphs, split.validation);
    run.small_test = gather(data.graphs, split.small_test);
    run.large_test = gather(data.graphs, split.large_test);
    run.triples = triples;
    if (warm) run.explainer_model = *warm;
    ctx.say("training on " + std::to_string(triples.size()) + " triples into " + dir.string());
    TrainOutcome out = train_disgen(run.triples, run.validation, run.num_classes, ctx.config,
                                    warm ? &run.explainer_model : nullptr);
    if (!run.small_test.empty()) out.report.small_test_f1 = evaluate_f1(out.model, run.small_test);
    if (!run.large_test.empty()) out.report.large_test_f1 = evaluate_f1(out.model, run.large_test);
    write_run_outputs(dir, ctx.config, out.report);
    save_trained_model(dir / "model.txt", out.model);
    ctx.say("small-test F1 " + format_real(out.report.small_test_f1) + ", large-test F1 " +
            format_real(out.report.large_test_f1));
    if (out.report.aborted) throw TrainingError(out.report.diagnostic);
}

fs::path latest_run(const fs::path& out) {
    const fs::path runs = out / "runs";
    if (!fs::is_directory(runs)) throw MissingDependencyError(runs.string() + " not found; run 'train' first");
    fs::path best;
    for (const auto& e : fs::directory_iterator(runs))
        if (e.is_directory() && fs::exists(e.path() / "model.txt") && e.path().filename() > best.filename()) best = e.path();
    if (best.empty()) throw MissingDependencyError("no trained run under " + runs.string());
    return best;
}

void cmd_eval(Context& ctx) {
    const fs::path run = ctx.spec.run_dir.empty() ? latest_run(ctx.spec.out) : ctx.spec.run_dir;
    require(run / "model.txt", "train");
    const TuDataset data = load_workspace_dataset(ctx.spec.out);
    const DatasetSplit split = load_workspace_split(ctx.spec.out);
    const fs::path dir = fresh_run_dir(ctx.spec.out / "evals", ctx.config.seed);
    ctx.result.artifact_dir = dir;
    write_preamble(ctx, dir, {run.string(), "dataset/", "split.txt"}, {"eval.json"});

    const TrainedModel model = load_trained_model(run / "model.txt");
    Json j;
    j["run"] = run.string();
    auto score = [&](const char* key, const std::vector<std::int64_t>& ids) {
        const auto graphs = gather(data.graphs, ids);
        j[key] = graphs.empty() ? Json(nullptr) : Json(evaluate_f1(model, graphs));
    };
    score("validation_f1", split.validation);
    score("small_test_f1", split.small_test);
    score("large_test_f1", split.large_test);
    write_text(dir / "eval.json", j.dump(2) + "\n");
    ctx.say(j.dump());
}

struct Summary {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
Summary summarize(const std::vector<double>& v) {
    Summary s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

void cmd_synth_bench(Context& ctx) {
    std::vector<std::uint64_t> seeds = ctx.config.seeds;
    if (ctx.spec.seed) seeds = {*ctx.spec.seed};
    const fs::path dir = fresh_run_dir(ctx.spec.out / "synth-bench", ctx.config.seed);
    ctx.result.artifact_dir = dir;
    write_preamble(ctx, dir, {}, {"seed-*/baseline/", "seed-*/disgen/", "summary.json", "summary.csv"});

    SizeShiftOptions options;
    options.per_class = ctx.config.synth_per_class;
    std::string csv = "seed,arm,small_test_f1,large_test_f1,best_epoch\n";
    std::vector<double> bs, bl, ds, dl;
    Json per_seed = Json::array();
    for (auto seed : seeds) {
        ctx.say("seed " + std::to_string(seed));
        const SizeShiftComparison cmp = run_size_shift_comparison(ctx.config, options, seed);
        RunConfig seeded = ctx.config;
        seeded.seed = seed;
        const fs::path sd = dir / ("seed-" + std::to_string(seed));
        write_run_outputs(sd / "baseline", baseline_of(seeded), cmp.baseline);
        write_run_outputs(sd / "disgen", seeded, cmp.disgen);
        bs.push_back(cmp.baseline_small_f1);
        bl.push_back(cmp.baseline_large_f1);
        ds.push_back(cmp.disgen_small_f1);
        dl.push_back(cmp.disgen_large_f1);
        csv += std::to_string(seed) + ",baseline," + format_real(cmp.baseline_small_f1) + "," +
               format_real(cmp.baseline_large_f1) + "," + std::to_string(cmp.baseline.best_epoch) + "\n";
        csv += std::to_string(seed) + ",disgen," + format_real(cmp.disgen_small_f1) + "," +
               format_real(cmp.disgen_large_f1) + "," + std::to_string(cmp.disgen.best_epoch) + "\n";
        per_seed.push_back({{"seed", seed},
                            {"baseline", {{"small_test_f1", cmp.baseline_small_f1}, {"large_test_f1", cmp.baseline_large_f1}}},
                            {"disgen", {{"small_test_f1", cmp.disgen_small_f1}, {"large_test_f1", cmp.disgen_large_f1}}}});
        ctx.say("  baseline " + format_real(cmp.baseline_small_f1) + " / " + format_real(cmp.baseline_large_f1) +
                ", disgen " + format_real(cmp.disgen_small_f1) + " / " + format_real(cmp.disgen_large_f1));
    }
    auto arm = [](const std::vector<double>& small, const std::vector<double>& large) {
        const Summary s = summarize(small), l = summarize(large);
        return Json{{"small_test_f1", {{"mean", s.mean}, {"std", s.std}}},
                    {"large_test_f1", {{"mean", l.mean}, {"std", l.std}}}};
    };
    Json j;
    j["seeds"] = seeds;
    j["per_class"] = options.per_class;
    j["per_seed"] = per_seed;
    j["baseline"] = arm(bs, bl);
    j["disgen"] = arm(ds, dl);
    j["large_gain_points"] = 100.0 * (summarize(dl).mean - summarize(bl).mean);
    j["small_drop_points"] = 100.0 * (summarize(bs).mean - summarize(ds).mean);
    write_text(dir / "summary.json", j.dump(2) + "\n");
    write_text(dir / "summary.csv", csv);
}

void cmd_theory_check(Context& ctx) {
    const fs::path dir = fresh_run_dir(ctx.spec.out / "theory", ctx.config.seed);
    ctx.result.artifact_dir = dir;
    write_preamble(ctx, dir, {}, {"probes.json", "lemma.json", "bound.json", "summary.json"});
    const std::uint64_t base = ctx.config.seed;
    std::size_t failures = 0;

    // Probe dichotomy: 20 instances per family cycling c ∈ {1,2}, d_h = 2c+1..2c+4.
    Json probes = Json::array();
    std::size_t probe_pass = 0;
    const auto radii = default_probe_radii();
    for (int family = 0; family < 2; ++family) {
        for (std::size_t i = 0; i < 20; ++i) {
            const std::size_t c = 1 + i % 2;
            const std::size_t d_h = 2 * c + 1 + (i / 2) % 4;
            Rng rng(base * 1000003 + 97 * i + 7 * family + 1);
            const SmoothFunctionPair pair = family == 0 ? make_decoupled_pair(c, d_h, rng) : make_constructed_pair(c, d_h, rng);
            const DecouplingProbe probe = decoupling_probe(pair, radii, std::max<std::size_t>(8 * d_h, 64), base + i);
            const bool pass = probe.second_order() != pair.decoupled;
            probe_pass += pass;
            probes.push_back(Json::parse(probe_json(pair, probe)));
        }
    }
    failures += 40 - probe_pass;
    write_text(dir / "probes.json", probes.dump(2) + "\n");

    std::size_t lemma_pass = 0;
    Rng lemma_rng(base + 4242);
    for (int k = 0; k < 200; ++k) {
        const std::size_t m = 3 + lemma_rng.index(6), n = 2 + lemma_rng.index(6), cols = 1 + lemma_rng.index(4);
        const MatrixSystem good = make_consistent_system(m, n, cols, lemma_rng);
        const MatrixSystem bad = make_inconsistent_system(m, n, cols, 0.1, lemma_rng);
        lemma_pass += solve_matrix_equation(good.c, good.b).consistent;
        lemma_pass += !solve_matrix_equation(bad.c, bad.b).consistent;
    }
    failures += 400 - lemma_pass;
    write_text(dir / "lemma.json", Json{{"systems", 400}, {"correct", lemma_pass}}.dump(2) + "\n");

    Json bounds = Json::array();
    std::size_t violations = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        BoundInputs in;
        in.s = {{-1.0, -1.0}, {1.0, 1.0}};
        in.s_prime = {{-0.5, -0.5}, {0.6, 0.6}};
        in.r0 = {0.05, 0.05};
        in.seed = base + s;
        const SoundnessReport report = bound_soundness_check(in, 20, 3);
        violations += report.violations;
        bounds.push_back(Json::parse(bound_json(in, report)));
    }
    failures += violations;
    write_text(dir / "bound.json", bounds.dump(2) + "\n");

    Json summary;
    summary["probe_dichotomy"] = {{"instances", 40}, {"correct", probe_pass}};
    summary["lemma_consistency"] = {{"systems", 400}, {"correct", lemma_pass}};
    summary["bound_soundness"] = {{"members", 100}, {"violations", violations}};
    summary["pass"] = failures == 0;
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    ctx.say(summary.dump());
    if (failures) throw ProbeError("theory-check: " + std::to_string(failures) + " checks failed");
}

std::vector<fs::path> metrics_dirs(const std::vector<fs::path>& inputs) {
    std::vector<fs::path> out;
    for (const auto& p : inputs) {
        if (fs::exists(p / "metrics.json")) {
            out.push_back(p);
            continue;
        }
        if (!fs::is_directory(p)) throw MissingDependencyError(p.string() + " is not a run directory");
        std::vector<fs::path> children;
        for (const auto& e : fs::directory_iterator(p))
            if (e.is_directory() && fs::exists(e.path() / "metrics.json")) children.push_back(e.path());
        if (children.empty()) throw MissingDependencyError(p.string() + " holds no metrics.json");
        std::sort(children.begin(), children.end());
        out.insert(out.end(), children.begin(), children.end());
    }
    return out;
}

void cmd_emit_metrics(Context& ctx) {
    if (ctx.spec.inputs.empty()) throw ConfigError("emit-metrics needs at least one run directory");
    stage_preamble(ctx, {"run directories"}, {"aggregate.json", "aggregate.csv", "runs.csv"});
    const auto dirs = metrics_dirs(ctx.spec.inputs);

    const std::vector<std::pair<std::string, std::function<double(const Json&)>>> columns = {
        {"small_test_f1", [](const Json& m) { return m.at("small_test_f1").get<double>(); }},
        {"large_test_f1", [](const Json& m) { return m.at("large_test_f1").get<double>(); }},
        {"best_epoch", [](const Json& m) { return m.at("best_epoch").get<double>(); }},
        {"epochs_run", [](const Json& m) { return m.at("epochs_run").get<double>(); }},
        {"L_s", [](const Json& m) { return m.at("loss_breakdown").at("L_s").get<double>(); }},
        {"L_t", [](const Json& m) { return m.at("loss_breakdown").at("L_t").get<double>(); }},
        {"L_d", [](const Json& m) { return m.at("loss_breakdown").at("L_d").get<double>(); }},
        {"D", [](const Json& m) { return m.at("loss_breakdown").at("D").get<double>(); }},
        {"total", [](const Json& m) { return m.at("loss_breakdown").at("total").get<double>(); }},
    };
    std::string hash;
    std::map<std::string, std::vector<double>> values;
    std::string runs_csv = "run,seed,config_hash";
    for (const auto& [name, get] : columns) runs_csv += "," + name;
    runs_csv += "\n";
    for (const auto& d : dirs) {
        require(d / "epochs.csv", "train");
        const Json m = read_json(d / "metrics.json");
        std::string h;
        try {
            h = m.at("config_hash").get<std::string>();
            runs_csv += d.string() + "," + std::to_string(m.at("seed").get<std::uint64_t>()) + "," + h;
            for (const auto& [name, get] : columns) {
                const double v = get(m);
                values[name].push_back(v);
                runs_csv += "," + format_real(v);
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError((d / "metrics.json").string() + ": " + e.what());
        }
        runs_csv += "\n";
        if (hash.empty()) hash = h;
        if (h != hash) {
            throw ConfigError("config hash " + h + " of " + d.string() + " differs from " + hash +
                              "; refusing to merge runs with different configs");
        }
    }
    Json agg;
    agg["runs"] = dirs.size();
    agg["config_hash"] = hash;
    std::string csv = "metric,mean,std,count\n";
    for (const auto& [name, get] : columns) {
        const Summary s = summarize(values[name]);
        agg["metrics"][name] = {{"mean", s.mean}, {"std", s.std}};
        csv += name + "," + format_real(s.mean) + "," + format_real(s.std) + "," + std::to_string(dirs.size()) + "\n";
    }
    write_text(ctx.spec.out / "aggregate.json", agg.dump(2) + "\n");
    write_text(ctx.spec.out / "aggregate.csv", csv);
    write_text(ctx.spec.out / "runs.csv", runs_csv);
    ctx.say("merged " + std::to_string(dirs.size()) + " runs");
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"ingest", cmd_ingest},           {"split", cmd_split},         {"pretrain", cmd_pretrain},
        {"explain", cmd_explain},         {"augment", cmd_augment},     {"train", cmd_train},
        {"eval", cmd_eval},               {"synth-bench", cmd_synth_bench}, {"theory-check", cmd_theory_check},
        {"emit-metrics", cmd_emit_metrics},
    };
    return table;
}

std::string one_line(std::string text) {
    for (char& ch : text)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return text;
}

std::string error_class_of(const Error& e) {
    const std::string& k = e.kind();
    if (k == "fingerprint") return "missing-dependency";
    if (k == "dimension" || k == "domain" || k == "singular" || k == "probe" || k == "training") return "numeric";
    return k;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"ingest", "split",       "pretrain",     "explain",     "augment",
                                                   "train",  "eval",        "synth-bench",  "theory-check", "emit-metrics"};
    return names;
}

int exit_code_for(const std::string& error_class) {
    if (error_class.empty()) return 0;
    if (error_class == "missing-dependency") return 2;
    if (error_class == "bad-config") return 3;
    if (error_class == "numeric") return 4;
    return 1;
}

std::string error_line(const CommandResult& result) {
    return result.error_class + ": " + one_line(result.message);
}

CommandResult run_command(const CommandSpec& spec, std::ostream& log) {
    CommandResult fail;
    try {
        const auto it = handlers().find(spec.subcommand);
        if (it == handlers().end()) throw ConfigError("unknown subcommand '" + spec.subcommand + "'");
        RunConfig config = spec.config_path.empty() ? RunConfig{} : load_run_config(spec.config_path);
        if (spec.seed) config.seed = *spec.seed;
        validate(config);
        fs::create_directories(spec.out);
        Context ctx{spec, std::move(config), log, {}};
        it->second(ctx);
        return ctx.result;
    } catch (const Error& e) {
        fail.error_class = error_class_of(e);
        fail.message = e.what();
    } catch (const fs::filesystem_error& e) {
        fail.error_class = "io";
        fail.message = e.what();
    } catch (const std::exception& e) {
        fail.error_class = "internal";
        fail.message = e.what();
    }
    fail.exit_code = exit_code_for(fail.error_class);
    return fail;
}

}  // namespace disgen
