#include "disgen/early_stop.hpp"

#include "disgen/error.hpp"

namespace disgen {

EarlyStopDecision early_stop_check(std::span<const double> validation_losses, std::size_t patience) {
    if (validation_losses.empty()) throw ContractError("early_stop_check: empty history");
    EarlyStopDecision d;
    for (std::size_t i = 1; i < validation_losses.size(); ++i)
        if (validation_losses[i] < validation_losses[d.best_epoch]) d.best_epoch = i;
    d.stop = (validation_losses.size() - 1) - d.best_epoch >= patience;
    return d;
}

}  // namespace disgen
