#include "bt/error.hpp"

namespace bt {

const char* to_string(Errc c) {
    switch (c) {
        case Errc::UnknownLeafId: return "UnknownLeafId";
        case Errc::MalformedTree: return "MalformedTree";
        case Errc::ConditionReturnedRunning: return "ConditionReturnedRunning";
        case Errc::UnknownDecoratorRule: return "UnknownDecoratorRule";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::PartitionViolation: return "PartitionViolation";
        case Errc::NonFiniteState: return "NonFiniteState";
        case Errc::StepLengthViolated: return "StepLengthViolated";
        case Errc::DegenerateGradient: return "DegenerateGradient";
        case Errc::InvalidProfile: return "InvalidProfile";
        case Errc::NoFeasibleEvent: return "NoFeasibleEvent";
        case Errc::IntegrationDiverged: return "IntegrationDiverged";
        case Errc::NoCommonStep: return "NoCommonStep";
        case Errc::ParallelUnsupported: return "ParallelUnsupported";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::NoAchiever: return "NoAchiever";
        case Errc::NoValidGrounding: return "NoValidGrounding";
        case Errc::NondeterministicFSM: return "NondeterministicFSM";
        case Errc::NoProgress: return "NoProgress";
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::UnresolvedReference: return "UnresolvedReference";
        case Errc::MissingSection: return "MissingSection";
    }
    return "Error";
}

}  // namespace bt
