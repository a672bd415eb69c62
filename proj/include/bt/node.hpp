#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bt {

enum class NodeKind {
    Sequence,
    Fallback,
    Parallel,
    SequenceMemory,
    FallbackMemory,
    Decorator,
    Action,
    Condition,
};

[[nodiscard]] const char* to_string(NodeKind k);
[[nodiscard]] bool is_leaf(NodeKind k);
[[nodiscard]] bool is_control(NodeKind k);

/// What a Decorator does to its single child.
struct DecoratorPolicy {
    enum class Kind { Invert, MaxNTries, MaxTSeconds, Custom };

    Kind kind = Kind::Invert;
    int max_tries = 0;       // MaxNTries
    double max_seconds = 0;  // MaxTSeconds, on the context clock
    std::string rule;        // Custom: "name" or "name:argument", looked up in the context

    static DecoratorPolicy invert() { return {}; }
    static DecoratorPolicy max_tries_of(int n) {
        DecoratorPolicy p;
        p.kind = Kind::MaxNTries;
        p.max_tries = n;
        return p;
    }
    static DecoratorPolicy max_seconds_of(double t) {
        DecoratorPolicy p;
        p.kind = Kind::MaxTSeconds;
        p.max_seconds = t;
        return p;
    }
    static DecoratorPolicy custom(std::string rule) {
        DecoratorPolicy p;
        p.kind = Kind::Custom;
        p.rule = std::move(rule);
        return p;
    }
};

/// A node in the tree. Ownership is strictly parent-to-child, which makes the
/// structure rooted and acyclic by construction; `validate` checks the rest.
struct BTNode {
    NodeKind kind = NodeKind::Action;
    std::string id;   // unique within the tree
    std::string ref;  // leaves: behavior / predicate id resolved in the ExecutionContext
    int parallel_m = 0;
    DecoratorPolicy policy;
    std::vector<std::unique_ptr<BTNode>> children;

    [[nodiscard]] std::unique_ptr<BTNode> clone() const;
};

using NodePtr = std::unique_ptr<BTNode>;
using NodeList = std::vector<NodePtr>;

// Tree-building helpers. The id doubles as the ref for leaves built with the
// one-argument forms.
[[nodiscard]] NodePtr action(std::string id, std::string ref = "");
[[nodiscard]] NodePtr condition(std::string id, std::string ref = "");
[[nodiscard]] NodePtr sequence(std::string id, NodeList children);
[[nodiscard]] NodePtr fallback(std::string id, NodeList children);
[[nodiscard]] NodePtr parallel(std::string id, int m, NodeList children);
[[nodiscard]] NodePtr sequence_memory(std::string id, NodeList children);
[[nodiscard]] NodePtr fallback_memory(std::string id, NodeList children);
[[nodiscard]] NodePtr decorator(std::string id, DecoratorPolicy policy, NodePtr child);

/// Convenience for assembling child lists in test code.
template <typename... Ts>
[[nodiscard]] NodeList nodes(Ts&&... ts) {
    NodeList out;
    (out.push_back(std::forward<Ts>(ts)), ...);
    return out;
}

/// A structural rule violation found by validate(). Violations are data, not
/// exceptions: an empty list means the tree is well formed.
struct Violation {
    std::string node_id;
    std::string rule;
};

[[nodiscard]] std::vector<Violation> validate(const BTNode& root);

/// Depth-first visit (pre-order).
void visit(const BTNode& root, const std::function<void(const BTNode&)>& fn);

}  // namespace bt
