#pragma once

#include <stdexcept>
#include <string>

namespace bt {

enum class Errc {
    UnknownLeafId,
    MalformedTree,
    ConditionReturnedRunning,
    UnknownDecoratorRule,
    // statespace
    DimensionMismatch,
    PartitionViolation,
    NonFiniteState,
    StepLengthViolated,
    DegenerateGradient,
    // reliability
    InvalidProfile,
    NoFeasibleEvent,
    IntegrationDiverged,
    NoCommonStep,
    ParallelUnsupported,
    OutOfRange,
    // planner
    NoAchiever,
    NoValidGrounding,
    // converters
    NondeterministicFSM,
    NoProgress,
    // text / cli
    SyntaxError,
    UnresolvedReference,
    MissingSection,
};

[[nodiscard]] const char* to_string(Errc c);

/// Library-wide exception. `code()` is stable for programmatic handling,
/// `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace bt
