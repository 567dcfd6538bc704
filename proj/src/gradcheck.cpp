#include "disgen/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "disgen/error.hpp"

namespace disgen {

namespace {

double evaluate(const TapeLoss& loss, const ParameterSet& params, const std::string& path, std::size_t index) {
    Tape tape;
    const double v = loss(tape, params).value().item();
    if (!std::isfinite(v)) {
        throw ProbeError("finite_diff_check: non-finite loss probing " + path + "[" + std::to_string(index) + "]");
    }
    return v;
}

}  // namespace

GradCheckReport finite_diff_check(const TapeLoss& loss, const ParameterSet& params, double step, double tolerance) {
    if (!(step > 0.0)) throw ContractError("finite_diff_check: step must be positive");

    Gradients analytic;
    {
        Tape tape;
        Var root = loss(tape, params);
        if (!std::isfinite(root.value().item())) throw ProbeError("finite_diff_check: non-finite loss at base point");
        analytic = tape.backward(root);
    }

    GradCheckReport report;
    report.tolerance = tolerance;
    ParameterSet probe = params;
    for (const auto& [path, entry] : params.entries()) {
        double worst = 0.0;
        const auto git = analytic.find(path);
        for (std::size_t i = 0; i < entry.value.size(); ++i) {
            Tensor& w = probe.mutable_at(path);
            const double original = w[i];
            w[i] = original + step;
            const double plus = evaluate(loss, probe, path, i);
            probe.mutable_at(path)[i] = original - step;
            const double minus = evaluate(loss, probe, path, i);
            probe.mutable_at(path)[i] = original;

            const double numeric = (plus - minus) / (2.0 * step);
            const double a = git == analytic.end() ? 0.0 : git->second[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > worst) worst = rel;
            if (rel > report.worst) {
                report.worst = rel;
                report.worst_parameter = path;
                report.worst_index = i;
            }
            ++report.entries_checked;
        }
        report.max_relative_error[path] = worst;
    }
    return report;
}

}  // namespace disgen
