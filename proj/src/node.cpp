#include "bt/node.hpp"

#include <set>

#include "bt/error.hpp"

namespace bt {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Sequence: return "sequence";
        case NodeKind::Fallback: return "fallback";
        case NodeKind::Parallel: return "parallel";
        case NodeKind::SequenceMemory: return "sequence*";
        case NodeKind::FallbackMemory: return "fallback*";
        case NodeKind::Decorator: return "decorator";
        case NodeKind::Action: return "action";
        case NodeKind::Condition: return "condition";
    }
    return "?";
}

bool is_leaf(NodeKind k) { return k == NodeKind::Action || k == NodeKind::Condition; }

bool is_control(NodeKind k) {
    return k == NodeKind::Sequence || k == NodeKind::Fallback || k == NodeKind::Parallel ||
           k == NodeKind::SequenceMemory || k == NodeKind::FallbackMemory;
}

std::unique_ptr<BTNode> BTNode::clone() const {
    auto out = std::make_unique<BTNode>();
    out->kind = kind;
    out->id = id;
    out->ref = ref;
    out->parallel_m = parallel_m;
    out->policy = policy;
    out->children.reserve(children.size());
    for (const auto& c : children) out->children.push_back(c->clone());
    return out;
}

namespace {
NodePtr make_leaf(NodeKind kind, std::string id, std::string ref) {
    auto n = std::make_unique<BTNode>();
    n->kind = kind;
    n->ref = ref.empty() ? id : std::move(ref);
    n->id = std::move(id);
    return n;
}

NodePtr make_control(NodeKind kind, std::string id, NodeList children) {
    auto n = std::make_unique<BTNode>();
    n->kind = kind;
    n->id = std::move(id);
    n->children = std::move(children);
    return n;
}
}  // namespace

NodePtr action(std::string id, std::string ref) {
    return make_leaf(NodeKind::Action, std::move(id), std::move(ref));
}
NodePtr condition(std::string id, std::string ref) {
    return make_leaf(NodeKind::Condition, std::move(id), std::move(ref));
}
NodePtr sequence(std::string id, NodeList children) {
    return make_control(NodeKind::Sequence, std::move(id), std::move(children));
}
NodePtr fallback(std::string id, NodeList children) {
    return make_control(NodeKind::Fallback, std::move(id), std::move(children));
}
NodePtr parallel(std::string id, int m, NodeList children) {
    auto n = make_control(NodeKind::Parallel, std::move(id), std::move(children));
    n->parallel_m = m;
    return n;
}
NodePtr sequence_memory(std::string id, NodeList children) {
    return make_control(NodeKind::SequenceMemory, std::move(id), std::move(children));
}
NodePtr fallback_memory(std::string id, NodeList children) {
    return make_control(NodeKind::FallbackMemory, std::move(id), std::move(children));
}
NodePtr decorator(std::string id, DecoratorPolicy policy, NodePtr child) {
    auto n = std::make_unique<BTNode>();
    n->kind = NodeKind::Decorator;
    n->id = std::move(id);
    n->policy = std::move(policy);
    n->children.push_back(std::move(child));
    return n;
}

void visit(const BTNode& root, const std::function<void(const BTNode&)>& fn) {
    fn(root);
    for (const auto& c : root.children) visit(*c, fn);
}

std::vector<Violation> validate(const BTNode& root) {
    std::vector<Violation> out;
    std::set<std::string> ids;
    visit(root, [&](const BTNode& n) {
        if (!ids.insert(n.id).second)
            out.push_back({n.id, "duplicate node id"});
        if (is_control(n.kind) && n.children.empty())
            out.push_back({n.id, "control node must have at least one child"});
        if (is_leaf(n.kind) && !n.children.empty())
            out.push_back({n.id, "leaf node must have no children"});
        if (n.kind == NodeKind::Decorator && n.children.size() != 1)
            out.push_back({n.id, "decorator must have exactly one child"});
        if (n.kind == NodeKind::Parallel &&
            (n.parallel_m < 1 || n.parallel_m > static_cast<int>(n.children.size())))
            out.push_back({n.id, "parallel threshold must satisfy 1 <= M <= child count"});
    });
    return out;
}

}  // namespace bt
