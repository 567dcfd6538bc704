#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "disgen/graph.hpp"

namespace disgen {

/// Four disjoint id lists. Graphs in the first three come from the smallest
/// half of the dataset; large_test is drawn from the remainder with the same
/// per-class counts as small_test.
struct DatasetSplit {
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> validation;
    std::vector<std::int64_t> small_test;
    std::vector<std::int64_t> large_test;

    bool operator==(const DatasetSplit&) const = default;
};

struct SplitRatios {
    double train = 70.0;
    double validation = 15.0;
    double test = 15.0;

    bool operator==(const SplitRatios&) const = default;
};

inline constexpr std::size_t kMinGraphsPerClass = 20;

/// Size-based split:
///  1. sort by node count (ties by id) and keep the smallest 50% as the pool;
///  2. per class, shuffle the pool members (seeded) and cut train / validation
///     / small_test with floor arithmetic: n_train = ⌊n·r_train⌋,
///     n_val = ⌊(n − n_train)·r_val / (r_val + r_test)⌋, rest to small_test;
///  3. per class, fill large_test from the largest remaining graph downward
///     until it matches that class's small_test count.
/// Throws SplitError when a class has fewer than kMinGraphsPerClass graphs or
/// its tail cannot supply enough large graphs.
DatasetSplit split_by_size(std::span<const GraphRecord> graphs, std::uint64_t seed, SplitRatios ratios = {});

struct UpsampleResult {
    std::vector<std::int64_t> ids;
    std::vector<std::string> warnings;
};

/// Repeats each train id of `target_class` `ratio` times (others once), then
/// shuffles with `seed`. A class absent from `train_ids` is a no-op plus warning.
UpsampleResult upsample_class(std::span<const std::int64_t> train_ids, std::span<const GraphRecord> graphs,
                              std::size_t target_class, std::size_t ratio, std::uint64_t seed);

/// Index of graphs by id; throws ContractError on unknown ids.
const GraphRecord& graph_by_id(std::span<const GraphRecord> graphs, std::int64_t id);

/// Hash of the sorted train id list; ties a pretrained model to its split.
std::uint64_t train_fingerprint(std::span<const std::int64_t> train_ids);

}  // namespace disgen
