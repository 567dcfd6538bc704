#pragma once

#include <cstddef>
#include <span>

namespace disgen {

struct EarlyStopDecision {
    bool stop = false;
    std::size_t best_epoch = 0;  // 0-based; earliest on ties
};

/// Stop once (current epoch − argmin epoch) ≥ patience, where the current
/// epoch is the last entry of `validation_losses`.
EarlyStopDecision early_stop_check(std::span<const double> validation_losses, std::size_t patience);

}  // namespace disgen
