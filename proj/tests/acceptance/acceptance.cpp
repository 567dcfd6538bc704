// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "disgen/augmentor.hpp"
#include "disgen/cli.hpp"
#include "disgen/disentangle.hpp"
#include "disgen/error.hpp"
#include "disgen/explainer.hpp"
#include "disgen/gradcheck.hpp"
#include "disgen/linalg.hpp"
#include "disgen/rng.hpp"
#include "disgen/synth.hpp"
#include "disgen/tu_format.hpp"
#include "json.hpp"

using namespace disgen;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor gaussian(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
    return t;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("disgen-acceptance-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CommandResult run_stage(const std::string& sub, const fs::path& out, const fs::path& config) {
    CommandSpec spec;
    spec.subcommand = sub;
    spec.out = out;
    spec.config_path = config;
    std::ostringstream log;
    return run_command(spec, log);
}

GraphRecord random_graph(std::size_t nodes, double p, std::size_t width, Rng& rng, std::size_t label,
                         std::int64_t id) {
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < nodes; ++u)
        for (std::size_t v = u + 1; v < nodes; ++v)
            if (rng.uniform() < p) edges.push_back({u, v});
    return make_graph(id, gaussian(nodes, width, rng), std::move(edges), label);
}

// 1. Finite differences on the full objective --------------------------------

Outcome gradient_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1);
    BackboneConfig bb;
    bb.kind = BackboneKind::GCN;
    bb.layers = 3;
    bb.hidden = 16;
    bb.input_width = 4;
    HeadConfig hc;
    hc.backbone_width = 16;
    hc.hidden = 8;
    hc.size_width = 4;
    ParameterSet params = init_backbone(bb, rng);
    params.merge(init_heads(hc, rng));

    std::vector<ViewTriple> triples;
    for (std::size_t k = 0; k < 4; ++k) {
        ViewTriple t;
        t.original = random_graph(6 + rng.index(6), 0.4, 4, rng, k % 2, static_cast<std::int64_t>(k));
        std::vector<Edge> drop;
        for (std::size_t e = 0; e < t.original.edges.size(); e += 4) drop.push_back(t.original.edges[e]);
        t.size_invariant = remove_edges(t.original, drop);
        t.task_invariant = remove_nodes(t.original, std::vector<std::size_t>{0});
        triples.push_back(std::move(t));
    }
    const GraphBatch batch = assemble_batch(std::span<const ViewTriple>(triples));
    LossWeights w;
    w.beta3 = 1.0;
    const GradCheckReport r = finite_diff_check(
        [&](Tape& tape, const ParameterSet& p) { return disgen_objective(tape, p, bb, hc, batch, w).total; }, params,
        1e-5, 1e-4);
    const double elapsed = seconds_since(t0);
    return {r.passed() && elapsed < 60.0,
            std::to_string(r.entries_checked) + " entries, worst relative error " + fmt("%.3g", r.worst) + " at " +
                r.worst_parameter + ", " + fmt("%.1f", elapsed) + " s"};
}

// 2. Closed-form projection is optimal ----------------------------------------

double residual_with(const Tensor& ht, const Tensor& hs, const Tensor& p) {
    return frobenius_norm(subtract(matmul(ht, p), hs));
}

/// Gradient descent on ‖H_t P − H_s‖²_F with step 1/L, L = 2·tr(H_tᵀH_t) ≥ 2λ_max.
Tensor descend_projection(const Tensor& ht, const Tensor& hs) {
    const Tensor gram = matmul(transpose(ht), ht);
    const Tensor rhs = matmul(transpose(ht), hs);
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i) lipschitz += 2.0 * gram(i, i);
    Tensor p(ht.cols(), hs.cols());
    for (int it = 0; it < 1000000; ++it) {
        const Tensor grad = subtract(matmul(gram, p), rhs);  // half the gradient
        if (2.0 * frobenius_norm(grad) < 1e-13) break;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= 2.0 * grad[i] / lipschitz;
    }
    return p;
}

Outcome projection_optimality() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2);
    std::size_t beaten = 0;
    double worst_oracle = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Tensor ht = gaussian(12, 4, rng), hs = gaussian(12, 4, rng);
        Tape tape;
        const Projection proj = optimal_projection(tape.constant(ht), tape.constant(hs), 0.0);
        const double d = proj.residual.value().item();
        for (int j = 0; j < 100; ++j) {
            Tensor p = proj.p;
            p += gaussian(4, 4, rng, std::pow(10.0, -1.0 - 4.0 * rng.uniform()));
            if (residual_with(ht, hs, p) < d) ++beaten;
        }
        const double oracle = residual_with(ht, hs, descend_projection(ht, hs));
        worst_oracle = std::max(worst_oracle, std::abs(oracle - d));
    }
    const double elapsed = seconds_since(t0);
    return {beaten == 0 && worst_oracle < 1e-6 && elapsed < 30.0,
            std::to_string(beaten) + " of 10000 perturbations beat D, max |D - D_gd| " + fmt("%.3g", worst_oracle) +
                ", " + fmt("%.1f", elapsed) + " s"};
}

// 3. Worked instance ------------------------------------------------------------

Outcome worked_instance() {
    const Tensor ht = Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}});
    const Tensor hs = Tensor::from_rows({{1, 0}, {0, 1}, {0, 0}});
    Tape tape;
    const Projection proj = optimal_projection(tape.constant(ht), tape.constant(hs), 0.0);
    const Tensor want = Tensor::from_rows({{2.0 / 3, -1.0 / 3}, {-1.0 / 3, 2.0 / 3}});
    const double p_err = max_abs_diff(proj.p, want);
    const double d_err = std::abs(proj.residual.value().item() - std::sqrt(2.0 / 3.0));
    return {p_err < 1e-12 && d_err < 1e-12, "max |P - P*| " + fmt("%.3g", p_err) + ", |D - sqrt(2/3)| " + fmt("%.3g", d_err)};
}

// 4. Loss closed forms -------------------------------------------------------------

Outcome loss_closed_forms() {
    Tape tape;
    const Var s = tape.constant(Tensor::from_rows({{1, 2, 0}, {0.5, -1, 3}}));
    const Var s1 = tape.constant(Tensor::from_rows({{2, 1, 0}, {3, 0.5, -1}}));
    const Var s2 = tape.constant(Tensor::from_rows({{6, 3, 0}, {1.5, 0.25, -0.5}}));
    // s2 rows are positive multiples of s1 rows, so c1 = c2 in every row
    const double ls = contrastive_loss(s, s1, s2, 0.5).value().item();
    const Var uniform = tape.constant(Tensor(3, 2));
    const std::vector<std::size_t> labels{0, 1, 1};
    const double lt = supervision_loss(uniform, uniform, labels, 1.0, 1.0).value().item();
    const double e1 = std::abs(ls - std::numbers::ln2), e2 = std::abs(lt - 2 * std::numbers::ln2);
    return {e1 < 1e-12 && e2 < 1e-12, "|L_s - ln 2| " + fmt("%.3g", e1) + ", |L_t - 2 ln 2| " + fmt("%.3g", e2)};
}

// 5. Augmentation contract -----------------------------------------------------

std::size_t attempt_bound(std::size_t k2) {
    if (k2 <= 1) return 1;
    return static_cast<std::size_t>(std::ceil(std::log(1.0 / static_cast<double>(k2)) / std::log(0.9))) + 1;
}

Outcome augmentation_contract() {
    const auto t0 = std::chrono::steady_clock::now();
    const TuDataset fixture = parse_tu_dataset(fs::path(DISGEN_FIXTURE_DIR) / "sizeshift", "SIZESHIFT");
    BackboneConfig config;
    config.hidden = 16;
    config.input_width = fixture.feature_width();
    PretrainOptions options;
    options.epochs = 40;
    options.learning_rate = 1e-2;
    options.seed = 3;
    const PretrainedModel model = pretrain_backbone(fixture.graphs, {}, config, 2, options, 1);
    const OcclusionExplainer explainer(model);

    std::vector<GraphRecord> graphs = fixture.graphs;
    Rng rng(5);
    const SizeShiftOptions shape;
    for (std::int64_t id = 0; id < 1000; ++id) {
        const std::size_t n = 8 + rng.index(57);
        graphs.push_back(make_size_shift_graph(n, rng.index(2), shape, rng, 10000 + id));
    }

    std::size_t violations = 0, checked = 0, retried = 0;
    const LabelOracle always_flips = [](const GraphRecord& g) { return g.num_nodes(); };
    for (const auto& g : graphs) {
        const EdgeImportance imp = explainer.explain(g);
        const ViewTriple t = make_triple(g, imp, model);
        const std::size_t k1 = fraction_of(g.num_nodes(), 0.2);
        bool ok = t.size_invariant.num_nodes() == g.num_nodes() &&
                  t.size_invariant.num_edges() == g.num_edges() - std::min(k1, g.num_edges()) &&
                  t.task_invariant.num_nodes() + 1 <= g.num_nodes() &&
                  t.audit.attempts <= attempt_bound(t.audit.k2_initial);
        retried += t.audit.retries > 0;
        // the same graph under an oracle that never agrees exercises the full retry path
        const auto [view, audit] =
            task_invariant_view(g, node_scores(imp.symmetric, g), t.audit.k2_initial, always_flips);
        ok = ok && view.num_nodes() + 1 <= g.num_nodes() && audit.attempts <= attempt_bound(audit.k2_initial);
        violations += !ok;
        ++checked;
    }
    const double elapsed = seconds_since(t0);
    return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checked) +
                                 " graphs (" + std::to_string(retried) + " needed model retries), " +
                                 fmt("%.1f", elapsed) + " s"};
}

// 6. Size-shift benchmark ------------------------------------------------------

Outcome size_generalization() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path ws = scratch("synth");
    const CommandResult r = run_stage("synth-bench", ws, fs::path(DISGEN_SOURCE_DIR) / "configs" / "synth_bench.cfg");
    const double elapsed = seconds_since(t0);
    if (r.exit_code != 0) return {false, error_line(r)};
    const Json s = Json::parse(slurp(r.artifact_dir / "summary.json"));
    const double gain = s.at("large_gain_points").get<double>();
    const double drop = s.at("small_drop_points").get<double>();
    const bool pass = s.at("seeds").size() == 5 && gain >= 5.0 && drop < 2.0 && elapsed < 900.0;
    return {pass, "large-test gain " + fmt("%.2f", gain) + " points (need >= 5), small-test drop " + fmt("%.2f", drop) +
                      " points (need < 2), baseline large " +
                      fmt("%.3f", s.at("baseline").at("large_test_f1").at("mean").get<double>()) + ", disgen large " +
                      fmt("%.3f", s.at("disgen").at("large_test_f1").at("mean").get<double>()) + ", " +
                      fmt("%.0f", elapsed) + " s"};
}

// 7. Theory lab -------------------------------------------------------------------

Outcome theory_lab() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path ws = scratch("theory");
    const CommandResult r = run_stage("theory-check", ws, {});
    const double elapsed = seconds_since(t0);
    if (r.artifact_dir.empty() || !fs::exists(r.artifact_dir / "probes.json")) return {false, error_line(r)};
    std::size_t decoupled_ok = 0, constructed_ok = 0, decoupled = 0, constructed = 0;
    for (const auto& p : Json::parse(slurp(r.artifact_dir / "probes.json"))) {
        const bool is_decoupled = p.at("instance").at("decoupled").get<bool>();
        (is_decoupled ? decoupled : constructed) += 1;
        (is_decoupled ? decoupled_ok : constructed_ok) += p.at("pass").get<bool>();
    }
    const Json summary = Json::parse(slurp(r.artifact_dir / "summary.json"));
    const auto lemma = summary.at("lemma_consistency").at("correct").get<std::size_t>();
    const auto violations = summary.at("bound_soundness").at("violations").get<std::size_t>();
    const auto members = summary.at("bound_soundness").at("members").get<std::size_t>();
    const bool pass = decoupled == 20 && constructed == 20 && decoupled_ok == 20 && constructed_ok == 20 &&
                      lemma == 400 && violations == 0 && members == 100 && elapsed < 300.0;
    return {pass, "decoupled " + std::to_string(decoupled_ok) + "/20 below 1.8, constructed " +
                      std::to_string(constructed_ok) + "/20 above 1.8, consistency " + std::to_string(lemma) +
                      "/400, bound violations " + std::to_string(violations) + "/" + std::to_string(members) + ", " +
                      fmt("%.1f", elapsed) + " s"};
}

// 8. Parser fidelity -----------------------------------------------------------

Outcome parser_fidelity() {
    const fs::path fixtures(DISGEN_FIXTURE_DIR);
    const std::vector<std::pair<std::string, std::string>> sets = {
        {"triangles", "TRI"}, {"edgeless", "EMPTY"}, {"attrs", "ATTR"}, {"sizeshift", "SIZESHIFT"}};
    std::size_t mismatches = 0;
    for (const auto& [dir, name] : sets) {
        const TuDataset first = parse_tu_dataset(fixtures / dir, name);
        const fs::path a = scratch("tu-a-" + name), b = scratch("tu-b-" + name);
        write_tu_dataset(a, first);
        const TuDataset second = parse_tu_dataset(a, name);
        write_tu_dataset(b, second);
        mismatches += !(first.graphs == second.graphs);
        for (const char* suffix : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt", "_node_labels.txt",
                                   "_node_attributes.txt"}) {
            const fs::path original = fixtures / dir / (name + suffix);
            if (fs::exists(original) != fs::exists(a / (name + suffix))) ++mismatches;
            if (!fs::exists(original)) continue;
            mismatches += slurp(original) != slurp(a / (name + suffix));
            mismatches += slurp(a / (name + suffix)) != slurp(b / (name + suffix));
        }
    }
    std::size_t wrong_errors = 0;
    for (const char* name : {"BADINT", "BADNODE", "CROSS", "ARITY", "COUNT", "GAP", "NODELAB", "NOLABELS"}) {
        try {
            parse_tu_dataset(fixtures / "malformed", name);
            ++wrong_errors;
        } catch (const FormatError& e) {
            if (std::string(e.what()).find(name) == std::string::npos) ++wrong_errors;
        } catch (...) {
            ++wrong_errors;
        }
    }
    return {mismatches == 0 && wrong_errors == 0,
            std::to_string(mismatches) + " round-trip mismatches over 4 fixtures, " + std::to_string(wrong_errors) +
                " of 8 malformed fixtures without a format error naming the file"};
}

// 9. Reproducibility ---------------------------------------------------------------

std::string pipeline_metrics(const fs::path& ws, const fs::path& config) {
    for (const char* stage : {"ingest", "split", "pretrain", "explain", "augment", "train"}) {
        const CommandResult r = run_stage(stage, ws, config);
        if (r.exit_code != 0) throw std::runtime_error(std::string(stage) + ": " + error_line(r));
        if (std::string(stage) == "train") return slurp(r.artifact_dir / "metrics.json");
    }
    return {};
}

Outcome reproducibility() {
    const fs::path root = scratch("repro");
    const fs::path config = root / "run.cfg";
    std::ofstream(config) << "dataset_path = " << (fs::path(DISGEN_FIXTURE_DIR) / "sizeshift").string() << "\n"
                          << "dataset_name = SIZESHIFT\nseed = 11\nhidden = 16\nenc_hidden = 8\nsize_width = 4\n"
                          << "pretrain_epochs = 30\nmax_epochs = 20\nbatch_size = 16\nlearning_rate = 0.005\n";
    try {
        const std::string a = pipeline_metrics(root / "a", config);
        const std::string b = pipeline_metrics(root / "b", config);
        const auto ha = std::hash<std::string>{}(a), hb = std::hash<std::string>{}(b);
        return {!a.empty() && ha == hb, "metrics.json hashes " + std::to_string(ha) + " / " + std::to_string(hb)};
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient suite", gradient_suite},
        {"decoupling-loss optimality", projection_optimality},
        {"worked instance", worked_instance},
        {"loss closed forms", loss_closed_forms},
        {"augmentation contract", augmentation_contract},
        {"size-generalization direction", size_generalization},
        {"theory-lab dichotomy", theory_lab},
        {"parser fidelity", parser_fidelity},
        {"reproducibility", reproducibility},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
