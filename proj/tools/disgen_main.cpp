#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "disgen/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"DisGen: size-generalizable graph classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", disgen::kToolVersion);

    disgen::CommandSpec spec;
    std::uint64_t seed = 0;
    const std::map<std::string, std::string> about = {
        {"ingest", "parse a TU-format dataset into the workspace"},
        {"split", "size-based train/validation/test split"},
        {"pretrain", "train the frozen classifier used by the explainer"},
        {"explain", "edge importance scores (cached in importance.csv)"},
        {"augment", "build size- and task-invariant views"},
        {"train", "train DisGen on the view triples"},
        {"eval", "score a run on the small and large test sets"},
        {"synth-bench", "baseline vs DisGen on the synthetic size-shift benchmark"},
        {"theory-check", "decoupling probes, consistency systems and the bound check"},
        {"emit-metrics", "aggregate metrics.json files across runs"},
    };
    for (const auto& name : disgen::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", spec.config_path, "config file (key = value lines)");
        sub->add_option("--out", spec.out, "workspace / output directory");
        sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { spec.seed = seed; });
        sub->add_flag("--use-cache", spec.use_cache, "reuse a matching explainer cache");
        sub->add_flag("--verbose,-v", spec.verbose, "progress output on stderr");
        if (name == "eval") sub->add_option("--run", spec.run_dir, "run directory (default: latest)");
        if (name == "emit-metrics") sub->add_option("runs", spec.inputs, "run directories")->required();
        sub->callback([&spec, sub] { spec.subcommand = sub->get_name(); });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "bad-config: " << e.what() << '\n';
        return disgen::exit_code_for("bad-config");
    }
    if (spec.seed) spec.seed = seed;

    const disgen::CommandResult result = disgen::run_command(spec, std::cerr);
    if (result.exit_code != 0) {
        std::cerr << disgen::error_line(result) << '\n';
        return result.exit_code;
    }
    if (!result.artifact_dir.empty()) std::cout << result.artifact_dir.string() << '\n';
    return 0;
}
