#include "disgen/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "disgen/error.hpp"
#include "disgen/rng.hpp"

namespace disgen {

const GraphRecord& graph_by_id(std::span<const GraphRecord> graphs, std::int64_t id) {
    // Records produced by the parser and generator have id == position.
    if (id >= 0 && static_cast<std::size_t>(id) < graphs.size() && graphs[static_cast<std::size_t>(id)].id == id) {
        return graphs[static_cast<std::size_t>(id)];
    }
    for (const auto& g : graphs)
        if (g.id == id) return g;
    throw ContractError("unknown graph id " + std::to_string(id));
}

DatasetSplit split_by_size(std::span<const GraphRecord> graphs, std::uint64_t seed, SplitRatios ratios) {
    if (!(ratios.train > 0 && ratios.validation >= 0 && ratios.test > 0)) {
        throw SplitError("split ratios must be positive");
    }
    std::map<std::size_t, std::size_t> class_totals;
    for (const auto& g : graphs) ++class_totals[g.label];
    for (const auto& [cls, count] : class_totals) {
        if (count < kMinGraphsPerClass) {
            throw SplitError("class " + std::to_string(cls) + " has " + std::to_string(count) + " graphs; need at least " +
                             std::to_string(kMinGraphsPerClass));
        }
    }

    std::vector<const GraphRecord*> order;
    order.reserve(graphs.size());
    for (const auto& g : graphs) order.push_back(&g);
    std::stable_sort(order.begin(), order.end(), [](const GraphRecord* a, const GraphRecord* b) {
        if (a->num_nodes() != b->num_nodes()) return a->num_nodes() < b->num_nodes();
        return a->id < b->id;
    });
    const std::size_t pool_size = order.size() / 2;

    std::map<std::size_t, std::vector<std::int64_t>> pool_by_class;
    std::map<std::size_t, std::vector<const GraphRecord*>> tail_by_class;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < pool_size) {
            pool_by_class[order[i]->label].push_back(order[i]->id);
        } else {
            tail_by_class[order[i]->label].push_back(order[i]);
        }
    }

    DatasetSplit split;
    Rng rng(seed);
    const double total = ratios.train + ratios.validation + ratios.test;
    const double val_share = ratios.validation / (ratios.validation + ratios.test);
    for (const auto& [cls, count] : class_totals) {
        (void)count;
        std::vector<std::int64_t> members = pool_by_class[cls];
        rng.shuffle(members);
        const std::size_t n = members.size();
        const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train / total));
        const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n - n_train) * val_share));
        const std::size_t n_small = n - n_train - n_val;
        split.train.insert(split.train.end(), members.begin(), members.begin() + n_train);
        split.validation.insert(split.validation.end(), members.begin() + n_train, members.begin() + n_train + n_val);
        split.small_test.insert(split.small_test.end(), members.begin() + n_train + n_val, members.end());

        auto& tail = tail_by_class[cls];
        if (tail.size() < n_small) {
            throw SplitError("class " + std::to_string(cls) + " has " + std::to_string(tail.size()) +
                             " graphs outside the small pool; large_test needs " + std::to_string(n_small));
        }
        // Largest first; equal sizes by ascending id.
        std::stable_sort(tail.begin(), tail.end(), [](const GraphRecord* a, const GraphRecord* b) {
            if (a->num_nodes() != b->num_nodes()) return a->num_nodes() > b->num_nodes();
            return a->id < b->id;
        });
        for (std::size_t i = 0; i < n_small; ++i) split.large_test.push_back(tail[i]->id);
    }
    return split;
}

UpsampleResult upsample_class(std::span<const std::int64_t> train_ids, std::span<const GraphRecord> graphs,
                              std::size_t target_class, std::size_t ratio, std::uint64_t seed) {
    if (ratio < 1) throw ContractError("upsample_class: ratio must be >= 1");
    UpsampleResult out;
    bool present = false;
    for (std::int64_t id : train_ids) {
        const bool hit = graph_by_id(graphs, id).label == target_class;
        present = present || hit;
        const std::size_t copies = hit ? ratio : 1;
        for (std::size_t k = 0; k < copies; ++k) out.ids.push_back(id);
    }
    if (!present) {
        out.warnings.push_back("upsample_class: class " + std::to_string(target_class) + " absent from train; no-op");
        out.ids.assign(train_ids.begin(), train_ids.end());
        return out;
    }
    Rng rng(seed);
    rng.shuffle(out.ids);
    return out;
}

std::uint64_t train_fingerprint(std::span<const std::int64_t> train_ids) {
    std::vector<std::int64_t> sorted(train_ids.begin(), train_ids.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return fnv1a(sorted.data(), sorted.size() * sizeof(std::int64_t));
}

}  // namespace disgen
