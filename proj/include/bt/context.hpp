#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "bt/status.hpp"

namespace bt {

class ExecutionContext;

/// Callbacks backing an Action or Condition leaf. `on_halt` (optional) fires
/// when the leaf was Running and stops receiving ticks.
struct LeafDriver {
    std::function<Status(ExecutionContext&)> on_tick;
    std::function<void(ExecutionContext&)> on_halt;
};

/// A custom decorator rule: may tick the child (zero or more times) and must
/// produce the decorator's status. `arg` is the text after ':' in the policy
/// rule string.
using DecoratorRule =
    std::function<Status(const std::function<Status()>& tick_child, const std::string& arg,
                         ExecutionContext&)>;

/// One leaf observation from the most recent tick.
struct LeafEvent {
    std::string node_id;
    std::string ref;
    Status status;
};

/// Mutable state shared by one ticking client of one tree: blackboard,
/// drivers, clock, memory-node storage and decorator counters. A context is
/// single-client; move it between threads only between ticks.
class ExecutionContext {
public:
    ExecutionContext();

    nlohmann::json blackboard = nlohmann::json::object();

    /// Injected clock (seconds). Tests substitute a fake.
    std::function<double()> clock = [] { return 0.0; };

    uint64_t tick_count = 0;

    void bind(const std::string& ref, LeafDriver driver) { drivers_[ref] = std::move(driver); }
    void bind(const std::string& ref, std::function<Status(ExecutionContext&)> on_tick) {
        drivers_[ref] = LeafDriver{std::move(on_tick), nullptr};
    }
    /// Scripted leaf: replays the given statuses, repeating the last one.
    void bind_script(const std::string& ref, std::vector<Status> script);

    [[nodiscard]] bool has_driver(const std::string& ref) const;
    void register_rule(const std::string& name, DecoratorRule rule) { rules_[name] = std::move(rule); }

    /// Leaf statuses observed during the most recent tick, in tick order.
    [[nodiscard]] const std::vector<LeafEvent>& last_tick_events() const { return events_; }

    // -- engine internals ----------------------------------------------------
    struct MemorySlot {
        std::vector<std::optional<Status>> remembered;
    };
    struct DecoratorSlot {
        int failures = 0;
        std::optional<double> window_start;
    };

    std::map<std::string, MemorySlot> memory;        // by memory-node id
    std::map<std::string, DecoratorSlot> decorators; // by decorator id

private:
    std::map<std::string, LeafDriver> drivers_;
    std::map<std::string, DecoratorRule> rules_;
    std::map<std::string, size_t> script_pos_;

    std::vector<LeafEvent> events_;
    std::map<std::string, std::string> running_;      // node id -> ref, leaves Running last tick
    std::map<std::string, std::string> prev_running_;
    std::set<std::string> ticked_;

    friend struct EngineAccess;
};

}  // namespace bt
