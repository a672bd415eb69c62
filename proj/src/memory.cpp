#include "bt/memory.hpp"

#include <string>

#include "bt/error.hpp"

namespace bt {

// The construction trades per-node memory for auxiliary blackboard flags:
//
//   SequenceMemory(C1..CN)  ->  clear_prefix
//                                 Sequence( Fallback(done_i?, mark_i(Ci)) ... )
//   FallbackMemory(C1..CN)  ->  clear_prefix
//                                 Fallback( Sequence(not failed_i?, mark_i(Ci)) ... )
//
// A remembered child is shielded by its flag condition, so it is not ticked
// again; the wrapper clears every flag exactly when the whole node resolves.
NodePtr emulate_memory(const BTNode& memory_node) {
    const bool is_sequence = memory_node.kind == NodeKind::SequenceMemory;
    if (!is_sequence && memory_node.kind != NodeKind::FallbackMemory)
        throw Error(Errc::MalformedTree, "emulate_memory expects a memory node");

    const std::string prefix = "@flag/" + memory_node.id + "/";
    NodeList rows;
    for (size_t i = 0; i < memory_node.children.size(); ++i) {
        const std::string tag = std::to_string(i + 1);
        const std::string key = prefix + tag;
        auto remembered = condition(memory_node.id + "_done" + tag, key);
        auto marked = decorator(
            memory_node.id + "_mark" + tag,
            DecoratorPolicy::custom((is_sequence ? "mark_on_success:" : "mark_on_failure:") + key),
            memory_node.children[i]->clone());
        if (is_sequence) {
            rows.push_back(fallback(memory_node.id + "_row" + tag,
                                    nodes(std::move(remembered), std::move(marked))));
        } else {
            auto not_failed = decorator(memory_node.id + "_fresh" + tag,
                                        DecoratorPolicy::invert(), std::move(remembered));
            rows.push_back(sequence(memory_node.id + "_row" + tag,
                                    nodes(std::move(not_failed), std::move(marked))));
        }
    }
    auto body = is_sequence ? sequence(memory_node.id + "_body", std::move(rows))
                            : fallback(memory_node.id + "_body", std::move(rows));
    return decorator(memory_node.id + "_memoryless", DecoratorPolicy::custom("clear_prefix:" + prefix),
                     std::move(body));
}

}  // namespace bt
