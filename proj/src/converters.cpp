#include "bt/converters.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "bt/statespace_models.hpp"

namespace bt::conv {

namespace {

std::string seq_id(const char* prefix, int& counter) {
    return std::string(prefix) + std::to_string(++counter);
}

}  // namespace

// ---------------------------------------------------------------------------
// Decision trees
// ---------------------------------------------------------------------------

DecisionTree DecisionTree::clone() const {
    DecisionTree out;
    out.label = label;
    if (yes) out.yes = std::make_unique<DecisionTree>(yes->clone());
    if (no) out.no = std::make_unique<DecisionTree>(no->clone());
    return out;
}

DecisionTree dt_leaf(std::string action) {
    DecisionTree t;
    t.label = std::move(action);
    return t;
}

DecisionTree dt_node(std::string predicate, DecisionTree yes_branch, DecisionTree no_branch) {
    DecisionTree t;
    t.label = std::move(predicate);
    t.yes = std::make_unique<DecisionTree>(std::move(yes_branch));
    t.no = std::make_unique<DecisionTree>(std::move(no_branch));
    return t;
}

namespace {

NodePtr dt_convert(const DecisionTree& dt, int& counter) {
    if (dt.is_leaf()) return action(seq_id("a", counter), dt.label);
    if (!dt.yes || !dt.no)
        throw Error(Errc::MalformedTree,
                    "decision node '" + dt.label + "' must have both branches");
    auto guard = condition(seq_id("p", counter), dt.label);
    auto taken = dt_convert(*dt.yes, counter);
    auto other = dt_convert(*dt.no, counter);
    auto seq = sequence(seq_id("s", counter), nodes(std::move(guard), std::move(taken)));
    return fallback(seq_id("f", counter), nodes(std::move(seq), std::move(other)));
}

}  // namespace

NodePtr dt_to_bt(const DecisionTree& dt) {
    int counter = 0;
    return dt_convert(dt, counter);
}

DecisionTree robot_dt() {
    return dt_node("task_urgent",
                   dt_node("battery_low", dt_leaf("recharge"), dt_leaf("perform_task")),
                   dt_leaf("recharge"));
}

// ---------------------------------------------------------------------------
// Subsumption stacks
// ---------------------------------------------------------------------------

NodePtr subsumption_to_bt(const SubsumptionStack& stack) {
    if (stack.controllers.empty())
        throw Error(Errc::MalformedTree, "subsumption stack has no controllers");
    NodeList rows;
    int counter = 0;
    for (const SubController& c : stack.controllers)
        rows.push_back(action(seq_id("c", counter), c.name));
    return fallback("stack", std::move(rows));
}

void bind_subsumption(ExecutionContext& ctx, const SubsumptionStack& stack) {
    for (const SubController& c : stack.controllers)
        ctx.bind(c.name, [key = c.wants_key](ExecutionContext& cx) {
            return cx.blackboard.value(key, false) ? Status::Running : Status::Failure;
        });
}

SubsumptionStack overheat_stack() {
    return {{{"stop_if_overheated", "overheated"},
             {"recharge_if_needed", "battery_low"},
             {"do_other_tasks", "has_other_work"}}};
}

// ---------------------------------------------------------------------------
// Teleo-reactive programs
// ---------------------------------------------------------------------------

NodePtr tr_to_bt(const TRProgram& program) {
    if (program.rules.empty()) throw Error(Errc::MalformedTree, "program has no rules");
    NodeList rows;
    int counter = 0;
    for (const TRRule& rule : program.rules) {
        auto guard = condition(seq_id("c", counter),
                               rule.condition.empty() ? kCatchAllRef : rule.condition);
        auto act = action(seq_id("a", counter), rule.action);
        rows.push_back(sequence(seq_id("r", counter), nodes(std::move(guard), std::move(act))));
    }
    return fallback("rules", std::move(rows));
}

TRProgram goto_program() {
    return {{{"at_destination", "idle"}, {"heading_toward", "go_forwards"}, {"", "rotate"}}};
}

RegressionReport check_stronger_regression(const TRProgram& program,
                                           const std::vector<std::vector<bool>>& condition_trace) {
    const std::size_t m = program.rules.size();
    for (const auto& row : condition_trace)
        if (row.size() != m)
            throw Error(Errc::DimensionMismatch,
                        "condition snapshot size " + std::to_string(row.size()) +
                            ", program has " + std::to_string(m) + " rules");

    auto active = [&](const std::vector<bool>& row) -> std::optional<int> {
        for (std::size_t i = 0; i < m; ++i)
            if (program.rules[i].condition.empty() || row[i]) return static_cast<int>(i);
        return std::nullopt;
    };

    RegressionReport report;
    for (std::size_t t = 0; t + 1 < condition_trace.size(); ++t) {
        std::optional<int> now = active(condition_trace[t]);
        if (!now || *now == 0) continue;  // nothing to chain, or the goal rule itself
        std::optional<int> next = active(condition_trace[t + 1]);
        if (next && *next <= *now) continue;  // continuation or upward progress
        report.holds = false;
        report.violations.push_back({*now, t, next});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Finite state machines
// ---------------------------------------------------------------------------

namespace {

std::string transition_ref(const FSMState& state, const FSMTransition& t) {
    return "t:" + state.name + ":" + (t.event.empty() ? "*" : t.event);
}

void validate_fsm(const FSMSpec& fsm) {
    if (fsm.states.empty()) throw Error(Errc::MalformedTree, "machine has no states");
    std::set<std::string> names;
    for (const FSMState& s : fsm.states)
        if (!names.insert(s.name).second)
            throw Error(Errc::NondeterministicFSM, "duplicate state '" + s.name + "'");
    if (!names.count(fsm.initial))
        throw Error(Errc::UnresolvedReference, "initial state '" + fsm.initial + "' undefined");
    for (const FSMState& s : fsm.states) {
        std::set<std::string> events;
        bool unconditional = false;
        for (const FSMTransition& t : s.transitions) {
            if (!names.count(t.to))
                throw Error(Errc::UnresolvedReference,
                            "state '" + s.name + "' transitions to undefined '" + t.to + "'");
            if (!events.insert(t.event).second)
                throw Error(Errc::NondeterministicFSM,
                            "state '" + s.name + "' has two transitions on event '" +
                                (t.event.empty() ? "<always>" : t.event) + "'");
            if (t.event.empty()) unconditional = true;
        }
        if (unconditional && s.transitions.size() > 1)
            throw Error(Errc::NondeterministicFSM,
                        "state '" + s.name +
                            "' mixes an unconditional transition with another transition");
    }
}

}  // namespace

NodePtr fsm_to_bt(const FSMSpec& fsm) {
    validate_fsm(fsm);
    NodeList rows;
    int counter = 0;
    for (const FSMState& s : fsm.states) {
        NodeList steps;
        steps.push_back(condition(seq_id("g", counter), "in:" + s.name));
        steps.push_back(action(seq_id("a", counter), s.action));
        for (const FSMTransition& t : s.transitions)
            steps.push_back(action(seq_id("u", counter), transition_ref(s, t)));
        rows.push_back(sequence("st:" + s.name, std::move(steps)));
    }
    return fallback("machine", std::move(rows));
}

void bind_fsm(ExecutionContext& ctx, const FSMSpec& fsm) {
    for (const FSMState& s : fsm.states) {
        ctx.bind("in:" + s.name, [key = fsm.state_key, name = s.name](ExecutionContext& cx) {
            return cx.blackboard.value(key, std::string()) == name ? Status::Success
                                                                   : Status::Failure;
        });
        ctx.bind(s.action, [](ExecutionContext&) { return Status::Success; });
        for (const FSMTransition& t : s.transitions)
            ctx.bind(transition_ref(s, t),
                     [sk = fsm.state_key, ek = fsm.event_key, ev = t.event,
                      to = t.to](ExecutionContext& cx) {
                         if (ev.empty() || cx.blackboard.value(ek, std::string()) == ev)
                             cx.blackboard[sk] = to;
                         return Status::Success;
                     });
    }
}

void seed_fsm(ExecutionContext& ctx, const FSMSpec& fsm) {
    ctx.blackboard[fsm.state_key] = fsm.initial;
}

FSMSpec toggle_fsm() {
    FSMSpec fsm;
    fsm.initial = "on";
    fsm.states = {{"on", "light_on", {{"", "off"}}}, {"off", "light_off", {{"", "on"}}}};
    return fsm;
}

FSMSpec grab_and_throw_fsm() {
    FSMSpec fsm;
    fsm.initial = "idle";
    fsm.states = {{"idle", "wait", {{"ball_seen", "approach"}}},
                  {"approach", "approach_ball", {{"ball_close", "grasp"}, {"ball_lost", "idle"}}},
                  {"grasp", "grasp_ball", {{"ball_grasped", "throw"}, {"ball_lost", "idle"}}},
                  {"throw", "throw_ball", {{"ball_thrown", "idle"}}}};
    return fsm;
}

// ---------------------------------------------------------------------------
// Shared runtime helpers
// ---------------------------------------------------------------------------

void bind_converted(ExecutionContext& ctx, const BTNode& root) {
    visit(root, [&ctx](const BTNode& n) {
        if (n.kind == NodeKind::Condition) {
            if (n.ref == kCatchAllRef)
                ctx.bind(n.ref, [](ExecutionContext&) { return Status::Success; });
            else
                ctx.bind(n.ref, [key = n.ref](ExecutionContext& cx) {
                    return cx.blackboard.value(key, false) ? Status::Success : Status::Failure;
                });
        } else if (n.kind == NodeKind::Action) {
            ctx.bind(n.ref, [](ExecutionContext&) { return Status::Running; });
        }
    });
}

std::optional<std::string> running_action(const BTNode& root, const ExecutionContext& ctx) {
    std::map<std::string, NodeKind> kinds;
    visit(root, [&kinds](const BTNode& n) { kinds[n.id] = n.kind; });
    for (const LeafEvent& ev : ctx.last_tick_events()) {
        auto it = kinds.find(ev.node_id);
        if (it != kinds.end() && it->second == NodeKind::Action && ev.status == Status::Running)
            return ev.ref;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Chained controller families
// ---------------------------------------------------------------------------

BurridgeResult burridge_order(const ControllerFamily& family, const ss::SampledDomain& domain) {
    if (family.controllers.empty())
        throw Error(Errc::MalformedTree, "controller family is empty");
    if (family.goal >= family.controllers.size())
        throw Error(Errc::OutOfRange, "goal index " + std::to_string(family.goal) +
                                          " out of range");

    std::vector<ss::RegionSpec> used{family.controllers[family.goal].spec};
    auto covered_now = [&used](const ss::Vec& x) {
        return std::any_of(used.begin(), used.end(), [&x](const ss::RegionSpec& spec) {
            return spec.in_attraction(x) || spec.success(x);
        });
    };

    BurridgeResult result;
    result.order.push_back(family.goal);
    result.composed = family.controllers[family.goal].bt;

    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < family.controllers.size(); ++i)
        if (i != family.goal) remaining.push_back(i);

    while (!remaining.empty()) {
        auto chosen = remaining.end();
        for (auto it = remaining.begin(); it != remaining.end(); ++it) {
            const ss::RegionSpec& spec = family.controllers[*it].spec;
            bool contained =
                std::all_of(domain.points.begin(), domain.points.end(),
                            [&](const ss::Vec& p) { return !spec.success(p) || covered_now(p); });
            if (contained) {
                chosen = it;
                break;
            }
        }
        if (chosen == remaining.end()) {
            std::string leftovers;
            for (std::size_t i : remaining) {
                if (!leftovers.empty()) leftovers += ", ";
                leftovers += family.controllers[i].name;
            }
            throw Error(Errc::NoProgress,
                        "no remaining controller's success region is contained in the "
                        "accumulated region; leftover: " +
                            leftovers);
        }
        const Controller& next = family.controllers[*chosen];
        result.composed = ss::compose_fallback(result.composed, next.bt);
        result.order.push_back(*chosen);
        used.push_back(next.spec);
        remaining.erase(chosen);
    }

    for (std::size_t i : result.order) result.names.push_back(family.controllers[i].name);
    std::string composed_name;
    for (const std::string& n : result.names) {
        if (!composed_name.empty()) composed_name += ",";
        composed_name += n;
    }
    result.composed.name = "chain(" + composed_name + ")";
    result.covered = [specs = std::move(used)](const ss::Vec& x) {
        return std::any_of(specs.begin(), specs.end(), [&x](const ss::RegionSpec& spec) {
            return spec.in_attraction(x) || spec.success(x);
        });
    };
    return result;
}

ControllerFamily humanoid_family() {
    ControllerFamily family;
    for (auto maker : {ss::models::walk_home, ss::models::sit_to_stand, ss::models::lie_to_sit}) {
        ss::models::NamedSystem sys = maker();
        family.controllers.push_back({sys.bt.name, std::move(sys.bt), std::move(sys.spec)});
    }
    family.goal = 0;
    return family;
}

}  // namespace bt::conv
