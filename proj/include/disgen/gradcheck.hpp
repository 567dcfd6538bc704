#pragma once

#include <functional>
#include <map>
#include <string>

#include "disgen/params.hpp"
#include "disgen/tape.hpp"

namespace disgen {

/// Builds a scalar loss on a fresh tape, binding parameters via
/// `tape.parameter(params, name)`. Must be deterministic in `params`.
using TapeLoss = std::function<Var(Tape&, const ParameterSet&)>;

struct GradCheckReport {
    std::map<std::string, double> max_relative_error;  // per parameter path
    double worst = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double tolerance = 0.0;
    std::size_t entries_checked = 0;

    bool passed() const { return worst < tolerance; }
};

/// Compares backward() against central differences (f(θ+h) − f(θ−h)) / 2h on
/// every parameter entry. Relative error is |a − g| / max(|a|, |g|, 1e-8).
/// Throws ProbeError when the loss is non-finite at a probe point.
GradCheckReport finite_diff_check(const TapeLoss& loss, const ParameterSet& params, double step, double tolerance);

}  // namespace disgen
