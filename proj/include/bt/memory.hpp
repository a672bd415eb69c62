#pragma once

#include "bt/node.hpp"

namespace bt {

/// Rewrite a SequenceMemory/FallbackMemory node into a memory-free tree whose
/// tick-by-tick root status (and set of ticked original children) matches the
/// memory node on any scripted child behavior. Bookkeeping lives on the
/// blackboard behind auxiliary conditions and the built-in decorator rules
/// mark_on_success / mark_on_failure / clear_prefix, mirroring the classical
/// construction that trades node memory for extra condition nodes.
[[nodiscard]] NodePtr emulate_memory(const BTNode& memory_node);

}  // namespace bt
