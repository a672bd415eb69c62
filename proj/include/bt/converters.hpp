#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bt/context.hpp"
#include "bt/error.hpp"
#include "bt/node.hpp"
#include "bt/statespace.hpp"

/// Equivalence constructions: build behavior trees from decision trees,
/// subsumption stacks, teleo-reactive programs, finite state machines and
/// chained-controller families. Every output uses only Fallback, Sequence,
/// Condition and Action nodes (no memory nodes, no Parallel), and each
/// converter comes with a binding helper that installs the leaf drivers the
/// output expects into an ExecutionContext.
namespace bt::conv {

// ---------------------------------------------------------------------------
// Decision trees
// ---------------------------------------------------------------------------

/// Binary decision tree: internal nodes carry a predicate id and two
/// branches, leaves carry an action id (both branches null).
struct DecisionTree {
    std::string label;
    std::unique_ptr<DecisionTree> yes, no;

    [[nodiscard]] bool is_leaf() const { return !yes && !no; }
    [[nodiscard]] DecisionTree clone() const;
};

[[nodiscard]] DecisionTree dt_leaf(std::string action);
[[nodiscard]] DecisionTree dt_node(std::string predicate, DecisionTree yes_branch,
                                   DecisionTree no_branch);

/// Recursive mapping: an internal node (P, yes, no) becomes
/// Fallback(Sequence(P, convert(yes)), convert(no)); a leaf becomes its
/// action. Bind with bind_converted, whose action drivers always return
/// Running: whichever action gets ticked is the one that executes, exactly
/// as the decision tree would choose it.
[[nodiscard]] NodePtr dt_to_bt(const DecisionTree& dt);

/// Built-in example: a robot deciding between performing a task and
/// recharging, based on task urgency and battery level.
[[nodiscard]] DecisionTree robot_dt();

// ---------------------------------------------------------------------------
// Subsumption stacks
// ---------------------------------------------------------------------------

/// One prioritized controller: `wants_key` is the blackboard flag that says
/// the controller wants to run; `name` doubles as the action ref.
struct SubController {
    std::string name;
    std::string wants_key;
};

/// Controllers ordered from highest to lowest priority.
struct SubsumptionStack {
    std::vector<SubController> controllers;
};

/// Fallback of controller actions in priority order. bind_subsumption's
/// drivers return Running while the controller's flag is truthy and Failure
/// otherwise (never Success), so the highest-priority willing controller is
/// the one that runs, and the root fails only when every controller declines.
[[nodiscard]] NodePtr subsumption_to_bt(const SubsumptionStack& stack);
void bind_subsumption(ExecutionContext& ctx, const SubsumptionStack& stack);

/// Built-in example: stop_if_overheated > recharge_if_needed > do_other_tasks.
[[nodiscard]] SubsumptionStack overheat_stack();

// ---------------------------------------------------------------------------
// Teleo-reactive programs
// ---------------------------------------------------------------------------

/// Condition refs on emitted Condition leaves; an empty condition marks a
/// catch-all rule and is emitted with the reserved ref below, which
/// bind_converted wires to constant Success.
inline constexpr const char* kCatchAllRef = "else";

struct TRRule {
    std::string condition;  ///< blackboard flag; empty = catch-all
    std::string action;
};

/// Ordered condition-action rules, scanned top to bottom; the first rule
/// whose condition holds runs its action.
struct TRProgram {
    std::vector<TRRule> rules;
};

/// Fallback(Sequence(c1, a1), ..., Sequence(cm, am)) in rule order; actions
/// only return Running, so a running action is preempted exactly when a
/// higher-priority condition starts to hold.
[[nodiscard]] NodePtr tr_to_bt(const TRProgram& program);

/// Built-in example, a go-to-destination program:
/// at_destination -> idle; heading_toward -> go_forwards; else -> rotate.
[[nodiscard]] TRProgram goto_program();

/// One broken step in a condition trace: while `rule` was the active rule,
/// the next snapshot activated `next_rule` (a lower-priority rule, or
/// nothing at all) instead of continuing or progressing upward.
struct RegressionViolation {
    int rule = 0;
    std::size_t step = 0;                ///< index of the snapshot the rule was active in
    std::optional<int> next_rule;        ///< empty: no rule was active afterwards
};

struct RegressionReport {
    bool holds = true;
    std::vector<RegressionViolation> violations;
};

/// Checks the strengthened chaining property on a sampled trajectory of
/// condition snapshots (one bool per rule per step; catch-all entries are
/// ignored): whenever a non-goal rule i is active, the next snapshot must
/// keep i active or activate some rule j < i. A jump to a lower-priority
/// rule means the active rule's own condition was violated before any
/// higher-priority condition was reached. The goal rule (index 0) is exempt.
[[nodiscard]] RegressionReport check_stronger_regression(
    const TRProgram& program, const std::vector<std::vector<bool>>& condition_trace);

// ---------------------------------------------------------------------------
// Finite state machines
// ---------------------------------------------------------------------------

struct FSMTransition {
    std::string event;  ///< empty = unconditional, fires every tick
    std::string to;
};

struct FSMState {
    std::string name;
    std::string action;
    std::vector<FSMTransition> transitions;
};

/// Deterministic FSM over blackboard values: the machine's current state
/// lives under `state_key`, and guards read the event under `event_key`.
/// One machine step happens per tick of the converted tree.
struct FSMSpec {
    std::string initial;
    std::vector<FSMState> states;
    std::string state_key = "state";
    std::string event_key = "event";
};

/// Fallback over states; each state is a Sequence of a state-variable guard,
/// the state's action (returning Success so the tick proceeds), and one
/// update leaf per transition that writes the target state iff its event
/// matches the blackboard event. Throws NondeterministicFSM when a state has
/// two transitions on the same event or mixes an unconditional transition
/// with any other; UnresolvedReference for unknown initial/target states;
/// MalformedTree for an empty machine. The caller seeds the state variable
/// with seed_fsm before the first tick.
[[nodiscard]] NodePtr fsm_to_bt(const FSMSpec& fsm);
void bind_fsm(ExecutionContext& ctx, const FSMSpec& fsm);
void seed_fsm(ExecutionContext& ctx, const FSMSpec& fsm);

/// Built-in examples: a two-state machine that alternates unconditionally,
/// and a four-state grab-and-throw task machine driven by ball events.
[[nodiscard]] FSMSpec toggle_fsm();
[[nodiscard]] FSMSpec grab_and_throw_fsm();

// ---------------------------------------------------------------------------
// Shared runtime helpers
// ---------------------------------------------------------------------------

/// Installs the drivers a converted decision tree or teleo-reactive tree
/// expects: every Condition leaf reads its ref as a boolean blackboard flag
/// (the reserved catch-all ref is constant Success), every Action leaf
/// always returns Running.
void bind_converted(ExecutionContext& ctx, const BTNode& root);

/// Ref of the Action leaf that returned Running in the most recent tick, if
/// any. Converted trees contain no Parallel node, so at most one exists.
[[nodiscard]] std::optional<std::string> running_action(const BTNode& root,
                                                        const ExecutionContext& ctx);

// ---------------------------------------------------------------------------
// Chained controller families
// ---------------------------------------------------------------------------

/// A named state-space controller with its claimed regions.
struct Controller {
    std::string name;
    ss::StateSpaceBT bt;
    ss::RegionSpec spec;
};

struct ControllerFamily {
    std::vector<Controller> controllers;
    std::size_t goal = 0;  ///< index of the overall-goal controller
};

struct BurridgeResult {
    std::vector<std::size_t> order;  ///< family indices in discovered order, goal first
    std::vector<std::string> names;  ///< the same order, by controller name
    ss::StateSpaceBT composed;       ///< fallback of the controllers in that order
    ss::Predicate covered;           ///< accumulated attraction-or-success region
};

/// Orders a controller family by iterated containment: starting from the
/// goal controller, repeatedly append the first declared controller whose
/// success region is sampled-contained in the accumulated region (the union
/// of appended controllers' attraction and success regions), composing with
/// Fallback as it goes. Containment is sampled: accepted iff no domain point
/// is a counterexample. Throws NoProgress, naming the leftover controllers,
/// when none of the remaining ones satisfies the containment.
[[nodiscard]] BurridgeResult burridge_order(const ControllerFamily& family,
                                            const ss::SampledDomain& domain);

/// Built-in family over the posture controllers: walk_home (goal),
/// sit_to_stand, lie_to_sit.
[[nodiscard]] ControllerFamily humanoid_family();

}  // namespace bt::conv
