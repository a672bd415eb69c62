#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bt/context.hpp"
#include "bt/error.hpp"
#include "bt/node.hpp"
#include "bt/status.hpp"

namespace bt::plan {

/// A ground or pattern atom. Argument strings beginning with '?' are
/// variables (only meaningful inside ActionTemplate patterns); everything
/// else is a constant. `negated` marks delete-effects and required-false
/// preconditions under the closed-world reading.
struct Fluent {
    std::string name;
    std::vector<std::string> args;
    bool negated = false;

    /// "name(a,b)" — identity of the atom, ignoring polarity.
    [[nodiscard]] std::string key() const;
    /// key() prefixed with '!' when negated.
    [[nodiscard]] std::string text() const;
    [[nodiscard]] Fluent negate() const;
    [[nodiscard]] bool is_ground() const;

    friend bool operator==(const Fluent& a, const Fluent& b) {
        return a.negated == b.negated && a.name == b.name && a.args == b.args;
    }
    friend bool operator<(const Fluent& a, const Fluent& b) {
        if (a.name != b.name) return a.name < b.name;
        if (a.args != b.args) return a.args < b.args;
        return a.negated < b.negated;
    }
};

[[nodiscard]] Fluent fluent(std::string name, std::vector<std::string> args = {});
[[nodiscard]] Fluent negation(std::string name, std::vector<std::string> args = {});

/// Closed-world set of true ground atoms. Everything not present is false.
/// Mutations (agent effects and scripted perturbations alike) are appended to
/// a textual log so a run can be replayed and audited.
class WorldState {
public:
    WorldState() = default;
    [[nodiscard]] static WorldState from(const std::vector<Fluent>& facts);

    /// Truth under closed world: positive atoms are true iff present,
    /// negated atoms are true iff absent.
    [[nodiscard]] bool holds(const Fluent& f) const;
    [[nodiscard]] bool holds_all(const std::vector<Fluent>& fs) const;

    /// Apply one effect: positive inserts the atom, negated removes it.
    void apply(const Fluent& effect);
    void apply_all(const std::vector<Fluent>& effects);

    [[nodiscard]] const std::set<std::string>& facts() const { return facts_; }
    [[nodiscard]] const std::vector<std::string>& mutation_log() const { return log_; }
    [[nodiscard]] bool contains(const std::string& key) const { return facts_.count(key) > 0; }

private:
    std::set<std::string> facts_;
    std::vector<std::string> log_;
};

/// A lifted action. `con` is a conjunction of disjunctions: each inner vector
/// must have at least one satisfied option (most entries are singletons).
/// `eff` is the add/delete list (negated = delete). Every variable used in
/// `con` or `eff` must appear in `params`. `duration` is the number of ticks
/// the ground action runs before its effects land; the completing tick
/// returns Success, earlier ticks Running, and a tick whose precondition
/// check fails returns Failure without progressing.
struct ActionTemplate {
    std::string name;
    std::vector<std::string> params;
    std::vector<std::vector<Fluent>> con;
    std::vector<Fluent> eff;
    int duration = 1;
};

/// One fully instantiated action: the template with every variable replaced
/// by a constant, plus its display signature "name(c1,c2)".
struct GroundAction {
    std::string signature;
    std::vector<std::vector<Fluent>> con;
    std::vector<Fluent> eff;
    int duration = 1;
};

/// Constants and action templates. Static fluent names are derived: a name
/// that never occurs in any template effect can never change, so groundings
/// whose static preconditions are false are pruned at expansion time.
struct Domain {
    std::vector<std::string> constants;
    std::vector<ActionTemplate> templates;

    [[nodiscard]] std::set<std::string> static_fluent_names() const;
};

/// External world mutation injected before the tick with index `tick`
/// (0-based, counted across the whole run). Perturbations also clear
/// memory-node state: latched child statuses are only valid while the world
/// changes through the agent's own actions.
struct ScriptedEvent {
    long tick = 0;
    std::vector<Fluent> effects;
};

/// What happened during a run, in order.
struct TraceEvent {
    enum class Kind { Tick, Expansion, Conflict, Promotion, Refinement, Perturbation };
    Kind kind = Kind::Tick;
    long tick = 0;          // global tick index the event belongs to
    Status status = Status::Running;  // Tick: root status
    std::string detail;     // Expansion: fluent; Conflict/Promotion/Refinement: description
    std::vector<std::pair<std::string, Status>> leaves;  // Tick: leaf signature -> status
    std::vector<std::string> completed;                  // Tick: actions finishing this tick
};

struct PlanTrace {
    std::vector<TraceEvent> events;
    std::vector<std::string> executed_actions;  // completed actions, in completion order
    long expansions = 0;
    long conflicts = 0;
    long promotions = 0;
    long refinements = 0;
    long ticks = 0;
};

enum class PlanOutcome { Success, BudgetExhausted, CannotExpand };
[[nodiscard]] const char* to_string(PlanOutcome o);

struct PlanResult {
    PlanOutcome outcome = PlanOutcome::BudgetExhausted;
    std::string detail;  // human-readable reason for non-success outcomes
    PlanTrace trace;
};

/// Interactive plan-and-act session over one domain and one mutable world.
/// The tree starts as a Sequence over the goal conditions and grows by
/// backward-chaining expansion exactly where execution fails. The free
/// function pabt_run drives the whole loop; the individual operations are
/// public so each step can be exercised and inspected on its own.
class Planner {
public:
    Planner(Domain domain, WorldState world, std::vector<Fluent> goal);

    /// Tick the tree once against the current world. Leaf statuses land in
    /// the trace and feed get_condition_to_expand.
    Status tick_once();

    /// Level-order sweep over condition leaves: the first one whose
    /// last-tick status is Failure and whose atom has not been expanded
    /// before. Conditions that did not tick last time are invisible.
    /// Marks the winner as expanded and remembers it for expand_tree.
    [[nodiscard]] std::optional<Fluent> get_condition_to_expand();

    /// Replace the condition leaf chosen by get_condition_to_expand with
    /// Fallback-with-memory [condition, Seq(con..., action)...] over every
    /// ground achiever, ordered by template declaration then constant
    /// declaration. Throws NoAchiever when no template effect unifies.
    void expand_tree();

    /// True when an action leaf strictly before the newest subtree in
    /// depth-first leaf order has an effect negating a singleton
    /// precondition of one of the subtree's actions.
    [[nodiscard]] bool detect_conflict() const;

    /// Move the newest subtree one step toward higher priority. The first
    /// call re-guards the vacated expansion slot with a bare copy of the
    /// expanded condition; later calls swap left among siblings or lift to
    /// the parent's level. Throws NoProgress past a fixed promotion cap.
    void increase_priority();

    /// Re-ground action rows whose static preconditions no longer hold.
    /// Returns the number of rows rebuilt. Throws NoValidGrounding when an
    /// invalid row has no remaining candidate.
    int refine_actions();

    /// Apply one external mutation (with memory reset) and log it.
    void perturb(const std::vector<Fluent>& effects);

    /// Full loop: refine, tick until Success/Failure, expand, resolve
    /// conflicts; `max_iterations` bounds expansion passes (>= 1), and a
    /// generous tick budget guards against perturbation-induced livelock.
    [[nodiscard]] PlanResult run(long max_iterations,
                                 const std::vector<ScriptedEvent>& script = {});

    [[nodiscard]] const BTNode& tree() const { return *root_; }
    [[nodiscard]] const WorldState& world() const { return world_; }
    [[nodiscard]] const PlanTrace& trace() const { return trace_; }
    [[nodiscard]] const std::set<std::string>& expanded_nodes() const { return expanded_; }
    /// Atom for a condition leaf / signature for an action leaf, by node id.
    [[nodiscard]] std::string leaf_label(const std::string& node_id) const;

private:
    struct ActionBinding {
        GroundAction action;
        Fluent target;  // the atom this row was grounded to achieve
        int template_index = -1;
        std::vector<std::string> bound_args;  // constants chosen for params
        int progress = 0;
    };

    NodePtr make_condition_leaf(const Fluent& f);
    NodePtr make_action_row(const ActionBinding& binding);
    [[nodiscard]] std::vector<ActionBinding> achievers(const Fluent& goal) const;
    void bind_condition(const std::string& ref, const Fluent& f);
    void collect_condition_leaves_level_order(std::vector<const BTNode*>& out) const;
    [[nodiscard]] const BTNode* find_node(const std::string& id) const;
    [[nodiscard]] BTNode* find_parent(BTNode* from, const std::string& child_id);

    Domain domain_;
    WorldState world_;
    std::vector<Fluent> goal_;
    NodePtr root_;
    ExecutionContext ctx_;
    PlanTrace trace_;

    std::set<std::string> expanded_;               // fluent keys already expanded
    std::map<std::string, Fluent> condition_of_;   // condition leaf id -> atom
    std::map<std::string, ActionBinding> action_of_;  // action leaf id -> binding
    std::map<std::string, Status> last_status_;    // leaf id -> status of last tick
    std::vector<std::string> tick_completed_;      // actions finished during this tick
    std::string pending_leaf_id_;                  // condition picked for expansion
    Fluent pending_fluent_;
    std::string newest_subtree_id_;                // subtree added by last expansion
    Fluent newest_fluent_;                         // atom that subtree achieves
    bool newest_subtree_moved_ = false;
    int promotions_of_newest_ = 0;
    long next_id_ = 0;
    long global_tick_ = 0;
};

/// One-call driver: build a Planner and run the loop.
[[nodiscard]] PlanResult pabt_run(const Domain& domain, const WorldState& world,
                                  const std::vector<Fluent>& goal, long max_iterations,
                                  const std::vector<ScriptedEvent>& script = {});

/// Offline backward chaining: wrap `goal` in Fallback [goal, Seq(con...,
/// action)...] and recurse into the achievers' preconditions while
/// `depth_budget` lasts. Plain (memoryless) Fallbacks; atoms with no
/// achiever, already-expanded atoms, and exhausted budget stay bare
/// condition leaves, so the call never throws.
[[nodiscard]] NodePtr backchain_ppa(const Fluent& goal, const Domain& domain, int depth_budget);

}  // namespace bt::plan
