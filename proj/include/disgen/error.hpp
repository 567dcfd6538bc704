#pragma once

#include <stdexcept>
#include <string>

namespace disgen {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable class name used by the CLI's single-line error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Numeric failures (exit class "numeric" in the CLI).
struct DimensionError : Error {
    explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};
struct SingularityError : Error {
    explicit SingularityError(const std::string& m) : Error("singular", m) {}
};
struct ProbeError : Error {
    explicit ProbeError(const std::string& m) : Error("probe", m) {}
};
struct TrainingError : Error {
    explicit TrainingError(const std::string& m) : Error("training", m) {}
};

// Contract / precondition violations.
struct ContractError : Error {
    explicit ContractError(const std::string& m) : Error("contract", m) {}
};
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& m) : Error("precondition", m) {}
};

// Data-level failures.
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct SplitError : Error {
    explicit SplitError(const std::string& m) : Error("split", m) {}
};
struct AugmentationError : Error {
    explicit AugmentationError(const std::string& m) : Error("augmentation", m) {}
};
struct FingerprintError : Error {
    explicit FingerprintError(const std::string& m) : Error("fingerprint", m) {}
};

// Run-level failures surfaced by the CLI.
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("bad-config", m) {}
};
struct MissingDependencyError : Error {
    explicit MissingDependencyError(const std::string& m) : Error("missing-dependency", m) {}
};

}  // namespace disgen
