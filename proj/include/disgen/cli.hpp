#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace disgen {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestVersion = 1;

/// One CLI invocation. `out` is the workspace shared by the pipeline stages:
///
///   ingest    dataset/<name>_*.txt, dataset/info.json
///   split     split.txt
///   pretrain  explainer.ckpt
///   explain   importance.csv
///   augment   triples.txt, audit.csv, views/<name>_G1_*, views/<name>_G2_*
///   train     runs/<timestamp>-seed<N>/{config,manifest,metrics}.json, epochs.csv, losses.csv, model.txt
///   eval      evals/<timestamp>-seed<N>/eval.json for the run in `run_dir` (latest run when empty)
///   synth-bench   synth-bench/<timestamp>-seed<N>/seed-<s>/{baseline,disgen}/..., summary.json, summary.csv
///   theory-check  theory/<timestamp>-seed<N>/{probes,lemma,bound,summary}.json
///   emit-metrics  aggregate.json, aggregate.csv and runs.csv from `inputs`
///
/// Every stage first writes manifests/<stage>/{config,manifest}.json (or the
/// same two files inside its own run directory).
struct CommandSpec {
    std::string subcommand;
    std::filesystem::path config_path;  // empty: built-in defaults
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    bool use_cache = false;
    bool verbose = false;
    std::filesystem::path run_dir;               // eval
    std::vector<std::filesystem::path> inputs;   // emit-metrics
};

struct CommandResult {
    int exit_code = 0;
    std::string error_class;        // empty on success
    std::string message;
    std::filesystem::path artifact_dir;  // run directory created by the command, if any
};

/// Exit codes: 0 success, 1 other failure, 2 missing-dependency (including
/// stale fingerprints), 3 bad-config, 4 numeric.
int exit_code_for(const std::string& error_class);

/// Runs one subcommand. Errors never escape: they become a nonzero exit
/// code plus a class name. Progress lines go to `log` when spec.verbose.
CommandResult run_command(const CommandSpec& spec, std::ostream& log);

/// `<class>: <message>` on one line.
std::string error_line(const CommandResult& result);

/// Subcommand names in pipeline order.
const std::vector<std::string>& subcommands();

}  // namespace disgen
