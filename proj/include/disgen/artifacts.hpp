#pragma once

#include <filesystem>
#include <vector>

#include "disgen/batch.hpp"
#include "disgen/split.hpp"
#include "disgen/trainer.hpp"

namespace disgen {

// Lossless text formats for artifacts passed between CLI stages. Reals are
// written with format_real, so every file reads back bit-exactly. Readers
// throw MissingDependencyError when the file is absent and FormatError when
// it is malformed.

/// `# disgen-split 1` header, then one line per part: `<part> id id ...`.
void write_split(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& path);

/// Triples with their audits; graphs keep features, edges, label and id.
void write_triples(const std::filesystem::path& path, std::span<const ViewTriple> triples);
std::vector<ViewTriple> read_triples(const std::filesystem::path& path);

/// Backbone and head shapes followed by every parameter tensor.
void save_trained_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_trained_model(const std::filesystem::path& path);

}  // namespace disgen
