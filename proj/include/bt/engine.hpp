#pragma once

#include "bt/context.hpp"
#include "bt/node.hpp"
#include "bt/status.hpp"

namespace bt {

/// Tick the tree once, routing the tick from the root per the classical
/// semantics: Sequence stops at the first non-Success child, Fallback at the
/// first non-Failure child, Parallel ticks every child and counts. Leaves that
/// were Running in the previous tick and received no tick this time get their
/// halt hook invoked before this call returns.
///
/// Throws Error(MalformedTree) when validate() reports violations,
/// Error(UnknownLeafId) for unbound leaves, and
/// Error(ConditionReturnedRunning) when a Condition driver misbehaves.
Status tick(const BTNode& root, ExecutionContext& ctx);

/// Alias of tick() restricted to memory nodes (asserts the node kind).
Status tick_memory(const BTNode& memory_node, ExecutionContext& ctx);

/// Clear all memory-node state and decorator counters for nodes of this tree,
/// and halt any leaf still Running.
void reset(const BTNode& root, ExecutionContext& ctx);

}  // namespace bt
