#include "bt/engine.hpp"

#include <optional>
#include <utility>

#include "bt/error.hpp"

namespace bt {

namespace {

std::pair<std::string, std::string> split_rule(const std::string& rule) {
    auto pos = rule.find(':');
    if (pos == std::string::npos) return {rule, ""};
    return {rule.substr(0, pos), rule.substr(pos + 1)};
}

/// Auxiliary blackboard-flag conditions used by the memory emulation: any
/// leaf ref of the form "@flag/<key>" succeeds iff the flag is set truthy.
std::optional<Status> builtin_leaf(const std::string& ref, ExecutionContext& ctx) {
    if (ref.rfind("@flag/", 0) == 0) {
        auto it = ctx.blackboard.find(ref);
        bool set = it != ctx.blackboard.end() && it->is_boolean() && it->get<bool>();
        return set ? Status::Success : Status::Failure;
    }
    return std::nullopt;
}

}  // namespace

struct EngineAccess {
    static Status tick_leaf(const BTNode& n, ExecutionContext& ctx, bool is_condition) {
        const std::string& ref = n.ref.empty() ? n.id : n.ref;
        Status s;
        auto it = ctx.drivers_.find(ref);
        if (it != ctx.drivers_.end()) {
            s = it->second.on_tick(ctx);
        } else if (auto b = builtin_leaf(ref, ctx)) {
            s = *b;
        } else {
            throw Error(Errc::UnknownLeafId, ref);
        }
        if (is_condition && s == Status::Running)
            throw Error(Errc::ConditionReturnedRunning, ref);
        ctx.ticked_.insert(n.id);
        ctx.events_.push_back({n.id, ref, s});
        if (s == Status::Running) ctx.running_[n.id] = ref;
        return s;
    }

    static Status tick_memory_node(const BTNode& n, ExecutionContext& ctx, bool is_sequence) {
        auto& slot = ctx.memory[n.id];
        slot.remembered.resize(n.children.size());
        // The status that moves a Sequence (resp. Fallback) on to its next
        // child is the one worth remembering; the opposite one resolves the
        // node, and resolving clears the memory.
        const Status moves_on = is_sequence ? Status::Success : Status::Failure;
        for (size_t i = 0; i < n.children.size(); ++i) {
            if (slot.remembered[i] == moves_on) continue;
            Status s = tick_node(*n.children[i], ctx);
            if (s == moves_on) {
                slot.remembered[i] = s;
                continue;
            }
            if (s == Status::Running) return s;
            ctx.memory.erase(n.id);
            return s;
        }
        ctx.memory.erase(n.id);
        return moves_on;
    }

    static Status tick_decorator(const BTNode& n, ExecutionContext& ctx) {
        const BTNode& child = *n.children.front();
        auto tick_child = [&] { return tick_node(child, ctx); };
        switch (n.policy.kind) {
            case DecoratorPolicy::Kind::Invert: {
                Status s = tick_child();
                if (s == Status::Success) return Status::Failure;
                if (s == Status::Failure) return Status::Success;
                return Status::Running;
            }
            case DecoratorPolicy::Kind::MaxNTries: {
                auto& slot = ctx.decorators[n.id];
                if (slot.failures >= n.policy.max_tries) return Status::Failure;
                Status s = tick_child();
                if (s == Status::Failure) ++slot.failures;
                if (s == Status::Success) slot.failures = 0;
                return s;
            }
            case DecoratorPolicy::Kind::MaxTSeconds: {
                auto& slot = ctx.decorators[n.id];
                const double now = ctx.clock();
                if (!slot.window_start) slot.window_start = now;
                if (now - *slot.window_start >= n.policy.max_seconds) {
                    slot.window_start.reset();
                    return Status::Failure;
                }
                Status s = tick_child();
                if (s != Status::Running) slot.window_start.reset();
                return s;
            }
            case DecoratorPolicy::Kind::Custom: {
                auto [name, arg] = split_rule(n.policy.rule);
                auto it = ctx.rules_.find(name);
                if (it == ctx.rules_.end()) throw Error(Errc::UnknownDecoratorRule, name);
                return it->second(tick_child, arg, ctx);
            }
        }
        throw Error(Errc::MalformedTree, "unknown decorator policy");
    }

    static Status tick_node(const BTNode& n, ExecutionContext& ctx) {
        switch (n.kind) {
            case NodeKind::Sequence:
                for (const auto& c : n.children) {
                    Status s = tick_node(*c, ctx);
                    if (s != Status::Success) return s;
                }
                return Status::Success;
            case NodeKind::Fallback:
                for (const auto& c : n.children) {
                    Status s = tick_node(*c, ctx);
                    if (s != Status::Failure) return s;
                }
                return Status::Failure;
            case NodeKind::Parallel: {
                // Every child is ticked, even once the outcome is decided.
                int succeeded = 0, failed = 0;
                for (const auto& c : n.children) {
                    Status s = tick_node(*c, ctx);
                    succeeded += s == Status::Success;
                    failed += s == Status::Failure;
                }
                const int count = static_cast<int>(n.children.size());
                if (succeeded >= n.parallel_m) return Status::Success;
                if (failed > count - n.parallel_m) return Status::Failure;
                return Status::Running;
            }
            case NodeKind::SequenceMemory: return tick_memory_node(n, ctx, true);
            case NodeKind::FallbackMemory: return tick_memory_node(n, ctx, false);
            case NodeKind::Decorator: return tick_decorator(n, ctx);
            case NodeKind::Action: return tick_leaf(n, ctx, false);
            case NodeKind::Condition: return tick_leaf(n, ctx, true);
        }
        throw Error(Errc::MalformedTree, "unknown node kind");
    }

    static Status run(const BTNode& root, ExecutionContext& ctx) {
        auto violations = validate(root);
        if (!violations.empty())
            throw Error(Errc::MalformedTree,
                        violations.front().node_id + ": " + violations.front().rule);
        ctx.prev_running_ = std::move(ctx.running_);
        ctx.running_.clear();
        ctx.events_.clear();
        ctx.ticked_.clear();
        ++ctx.tick_count;
        Status s = tick_node(root, ctx);
        for (const auto& [id, ref] : ctx.prev_running_) {
            if (ctx.ticked_.count(id)) continue;
            auto it = ctx.drivers_.find(ref);
            if (it != ctx.drivers_.end() && it->second.on_halt) it->second.on_halt(ctx);
        }
        ctx.prev_running_.clear();
        return s;
    }

    static void do_reset(const BTNode& root, ExecutionContext& ctx) {
        visit(root, [&](const BTNode& n) {
            ctx.memory.erase(n.id);
            ctx.decorators.erase(n.id);
            auto it = ctx.running_.find(n.id);
            if (it != ctx.running_.end()) {
                auto d = ctx.drivers_.find(it->second);
                if (d != ctx.drivers_.end() && d->second.on_halt) d->second.on_halt(ctx);
                ctx.running_.erase(it);
            }
        });
    }
};

ExecutionContext::ExecutionContext() {
    register_rule("mark_on_success",
                  [](const std::function<Status()>& tick_child, const std::string& arg,
                     ExecutionContext& c) {
                      Status s = tick_child();
                      if (s == Status::Success) c.blackboard[arg] = true;
                      return s;
                  });
    register_rule("mark_on_failure",
                  [](const std::function<Status()>& tick_child, const std::string& arg,
                     ExecutionContext& c) {
                      Status s = tick_child();
                      if (s == Status::Failure) c.blackboard[arg] = true;
                      return s;
                  });
    register_rule("clear_prefix",
                  [](const std::function<Status()>& tick_child, const std::string& arg,
                     ExecutionContext& c) {
                      Status s = tick_child();
                      if (s != Status::Running) {
                          for (auto it = c.blackboard.begin(); it != c.blackboard.end();) {
                              if (it.key().rfind(arg, 0) == 0) it = c.blackboard.erase(it);
                              else ++it;
                          }
                      }
                      return s;
                  });
}

void ExecutionContext::bind_script(const std::string& ref, std::vector<Status> script) {
    script_pos_[ref] = 0;
    drivers_[ref] = LeafDriver{
        [ref, script = std::move(script)](ExecutionContext& c) {
            size_t& pos = c.script_pos_[ref];
            if (script.empty()) return Status::Failure;
            Status s = script[pos < script.size() ? pos : script.size() - 1];
            ++pos;
            return s;
        },
        nullptr};
}

bool ExecutionContext::has_driver(const std::string& ref) const {
    return drivers_.count(ref) > 0;
}

Status tick(const BTNode& root, ExecutionContext& ctx) { return EngineAccess::run(root, ctx); }

Status tick_memory(const BTNode& memory_node, ExecutionContext& ctx) {
    if (memory_node.kind != NodeKind::SequenceMemory &&
        memory_node.kind != NodeKind::FallbackMemory)
        throw Error(Errc::MalformedTree, "tick_memory expects a memory node");
    return EngineAccess::run(memory_node, ctx);
}

void reset(const BTNode& root, ExecutionContext& ctx) { EngineAccess::do_reset(root, ctx); }

}  // namespace bt
