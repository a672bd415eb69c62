#pragma once

namespace bt {

/// Result of ticking a node. There are exactly three; a Condition leaf may
/// only ever produce Success or Failure.
enum class Status { Success, Failure, Running };

[[nodiscard]] constexpr const char* to_string(Status s) {
    switch (s) {
        case Status::Success: return "Success";
        case Status::Failure: return "Failure";
        case Status::Running: return "Running";
    }
    return "?";
}

}  // namespace bt
