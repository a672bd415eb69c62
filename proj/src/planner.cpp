#include "bt/planner.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "bt/engine.hpp"

namespace bt::plan {

namespace {

constexpr int kPromotionCap = 64;
constexpr long kTickBudget = 100000;

bool is_var(const std::string& s) { return !s.empty() && s[0] == '?'; }

std::string joined(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

Fluent substitute(const Fluent& pattern, const std::map<std::string, std::string>& binding) {
    Fluent out = pattern;
    for (auto& a : out.args) {
        if (!is_var(a)) continue;
        auto it = binding.find(a);
        if (it == binding.end()) throw Error(Errc::MalformedTree, "unbound variable " + a);
        a = it->second;
    }
    return out;
}

struct Grounding {
    GroundAction action;
    int template_index = -1;
    std::vector<std::string> bound_args;
};

/// Every grounding of a template whose effect unifies with `goal`. Templates
/// in declaration order; free parameters enumerate constants in declaration
/// order. With a world, groundings whose all-static precondition entries are
/// unsatisfied are pruned (static = the fluent name occurs in no effect, so
/// only an external mutation could ever make the entry true).
std::vector<Grounding> enumerate_achievers(const Domain& domain, const Fluent& goal,
                                           const WorldState* world) {
    std::vector<Grounding> out;
    std::set<std::string> seen;
    const std::set<std::string> statics = domain.static_fluent_names();
    for (std::size_t ti = 0; ti < domain.templates.size(); ++ti) {
        const ActionTemplate& t = domain.templates[ti];
        for (const Fluent& eff : t.eff) {
            if (eff.negated != goal.negated) continue;
            if (eff.name != goal.name || eff.args.size() != goal.args.size()) continue;
            std::map<std::string, std::string> binding;
            bool ok = true;
            for (std::size_t i = 0; i < eff.args.size() && ok; ++i) {
                const std::string& a = eff.args[i];
                if (is_var(a)) {
                    auto [it, fresh] = binding.emplace(a, goal.args[i]);
                    if (!fresh && it->second != goal.args[i]) ok = false;
                } else if (a != goal.args[i]) {
                    ok = false;
                }
            }
            if (!ok) continue;
            std::vector<std::string> free_params;
            for (const std::string& p : t.params)
                if (!binding.count(p)) free_params.push_back(p);

            // Depth-first product over the free parameters.
            std::vector<std::size_t> choice(free_params.size(), 0);
            for (;;) {
                if (!free_params.empty() && domain.constants.empty()) break;
                for (std::size_t i = 0; i < free_params.size(); ++i)
                    binding[free_params[i]] = domain.constants[choice[i]];
                GroundAction ga;
                ga.duration = t.duration;
                bool feasible = true;
                for (const auto& disjunct : t.con) {
                    std::vector<Fluent> ground;
                    ground.reserve(disjunct.size());
                    for (const Fluent& c : disjunct) ground.push_back(substitute(c, binding));
                    if (world) {
                        bool all_static = std::all_of(
                            ground.begin(), ground.end(),
                            [&](const Fluent& g) { return statics.count(g.name) > 0; });
                        if (all_static) {
                            bool sat = std::any_of(ground.begin(), ground.end(),
                                                   [&](const Fluent& g) { return world->holds(g); });
                            if (!sat) {
                                feasible = false;
                                break;
                            }
                        }
                    }
                    ga.con.push_back(std::move(ground));
                }
                if (feasible) {
                    for (const Fluent& e : t.eff) ga.eff.push_back(substitute(e, binding));
                    std::vector<std::string> args;
                    args.reserve(t.params.size());
                    for (const std::string& p : t.params) args.push_back(binding.at(p));
                    ga.signature = t.name;
                    if (!args.empty()) ga.signature += "(" + joined(args) + ")";
                    if (seen.insert(ga.signature).second)
                        out.push_back({std::move(ga), static_cast<int>(ti), std::move(args)});
                }
                // Advance the product, last parameter fastest; exhausting
                // the first parameter ends the enumeration.
                bool exhausted = true;
                for (std::size_t i = free_params.size(); i-- > 0;) {
                    if (++choice[i] < domain.constants.size()) {
                        exhausted = false;
                        break;
                    }
                    choice[i] = 0;
                }
                if (exhausted) break;
            }
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fluent / WorldState / Domain

std::string Fluent::key() const {
    std::string out = name;
    if (!args.empty()) out += "(" + joined(args) + ")";
    return out;
}

std::string Fluent::text() const { return negated ? "!" + key() : key(); }

Fluent Fluent::negate() const {
    Fluent out = *this;
    out.negated = !out.negated;
    return out;
}

bool Fluent::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const std::string& a) { return is_var(a); });
}

Fluent fluent(std::string name, std::vector<std::string> args) {
    Fluent f;
    f.name = std::move(name);
    f.args = std::move(args);
    return f;
}

Fluent negation(std::string name, std::vector<std::string> args) {
    Fluent f = fluent(std::move(name), std::move(args));
    f.negated = true;
    return f;
}

WorldState WorldState::from(const std::vector<Fluent>& facts) {
    WorldState w;
    for (const Fluent& f : facts) {
        if (f.negated || !f.is_ground())
            throw Error(Errc::MalformedTree, "initial fact must be ground and positive: " + f.text());
        w.facts_.insert(f.key());
    }
    return w;
}

bool WorldState::holds(const Fluent& f) const {
    bool present = facts_.count(f.key()) > 0;
    return f.negated ? !present : present;
}

bool WorldState::holds_all(const std::vector<Fluent>& fs) const {
    return std::all_of(fs.begin(), fs.end(), [&](const Fluent& f) { return holds(f); });
}

void WorldState::apply(const Fluent& effect) {
    if (!effect.is_ground())
        throw Error(Errc::MalformedTree, "effect must be ground: " + effect.text());
    if (effect.negated)
        facts_.erase(effect.key());
    else
        facts_.insert(effect.key());
    log_.push_back((effect.negated ? "-" : "+") + effect.key());
}

void WorldState::apply_all(const std::vector<Fluent>& effects) {
    for (const Fluent& e : effects) apply(e);
}

std::set<std::string> Domain::static_fluent_names() const {
    std::set<std::string> dynamic;
    for (const ActionTemplate& t : templates)
        for (const Fluent& e : t.eff) dynamic.insert(e.name);
    std::set<std::string> out;
    for (const ActionTemplate& t : templates)
        for (const auto& disjunct : t.con)
            for (const Fluent& c : disjunct)
                if (!dynamic.count(c.name)) out.insert(c.name);
    return out;
}

const char* to_string(PlanOutcome o) {
    switch (o) {
        case PlanOutcome::Success: return "Success";
        case PlanOutcome::BudgetExhausted: return "BudgetExhausted";
        case PlanOutcome::CannotExpand: return "CannotExpand";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Planner

Planner::Planner(Domain domain, WorldState world, std::vector<Fluent> goal)
    : domain_(std::move(domain)), world_(std::move(world)), goal_(std::move(goal)) {
    if (goal_.empty()) throw Error(Errc::MalformedTree, "empty goal");
    for (const ActionTemplate& t : domain_.templates) {
        std::set<std::string> params(t.params.begin(), t.params.end());
        for (const Fluent& e : t.eff)
            for (const std::string& a : e.args)
                if (is_var(a) && !params.count(a))
                    throw Error(Errc::MalformedTree,
                                t.name + ": effect variable " + a + " not a parameter");
        for (const auto& disjunct : t.con)
            for (const Fluent& c : disjunct)
                for (const std::string& a : c.args)
                    if (is_var(a) && !params.count(a))
                        throw Error(Errc::MalformedTree,
                                    t.name + ": precondition variable " + a + " not a parameter");
    }
    NodeList kids;
    for (const Fluent& g : goal_) kids.push_back(make_condition_leaf(g));
    std::string id = "p" + std::to_string(next_id_++);
    root_ = sequence(id, std::move(kids));
}

NodePtr Planner::make_condition_leaf(const Fluent& f) {
    std::string id = "p" + std::to_string(next_id_++);
    std::string ref = "c:" + f.text();
    condition_of_[id] = f;
    bind_condition(ref, f);
    return condition(id, ref);
}

void Planner::bind_condition(const std::string& ref, const Fluent& f) {
    ctx_.bind(ref, [this, f](ExecutionContext&) {
        return world_.holds(f) ? Status::Success : Status::Failure;
    });
}

NodePtr Planner::make_action_row(const ActionBinding& binding) {
    const std::set<std::string> statics = domain_.static_fluent_names();
    NodeList row;
    for (const auto& disjunct : binding.action.con) {
        bool static_true = std::any_of(disjunct.begin(), disjunct.end(), [&](const Fluent& c) {
            return statics.count(c.name) > 0 && world_.holds(c);
        });
        if (static_true) continue;  // satisfied by an immutable fact; compiled out
        std::vector<Fluent> dynamic;
        for (const Fluent& c : disjunct)
            if (!statics.count(c.name)) dynamic.push_back(c);
        if (dynamic.empty()) continue;  // all-static-false groundings are pruned upstream
        if (dynamic.size() == 1) {
            row.push_back(make_condition_leaf(dynamic.front()));
        } else {
            NodeList options;
            for (const Fluent& c : dynamic) options.push_back(make_condition_leaf(c));
            row.push_back(fallback("p" + std::to_string(next_id_++), std::move(options)));
        }
    }
    std::string aid = "p" + std::to_string(next_id_++);
    std::string ref = binding.action.signature + "#" + aid;
    action_of_[aid] = binding;
    action_of_[aid].progress = 0;
    LeafDriver driver;
    driver.on_tick = [this, aid](ExecutionContext&) {
        ActionBinding& b = action_of_.at(aid);
        for (const auto& disjunct : b.action.con) {
            bool sat = std::any_of(disjunct.begin(), disjunct.end(),
                                   [&](const Fluent& c) { return world_.holds(c); });
            if (!sat) {
                b.progress = 0;
                return Status::Failure;
            }
        }
        if (++b.progress < b.action.duration) return Status::Running;
        b.progress = 0;
        world_.apply_all(b.action.eff);
        tick_completed_.push_back(b.action.signature);
        trace_.executed_actions.push_back(b.action.signature);
        return Status::Success;
    };
    driver.on_halt = [this, aid](ExecutionContext&) {
        auto it = action_of_.find(aid);
        if (it != action_of_.end()) it->second.progress = 0;
    };
    ctx_.bind(ref, std::move(driver));
    row.push_back(action(aid, ref));
    return sequence("p" + std::to_string(next_id_++), std::move(row));
}

std::vector<Planner::ActionBinding> Planner::achievers(const Fluent& goal) const {
    std::vector<ActionBinding> out;
    std::vector<Grounding> found = enumerate_achievers(domain_, goal, &world_);
    for (Grounding& g : found) {
        ActionBinding b;
        b.action = std::move(g.action);
        b.target = goal;
        b.template_index = g.template_index;
        b.bound_args = std::move(g.bound_args);
        out.push_back(std::move(b));
    }
    return out;
}

Status Planner::tick_once() {
    tick_completed_.clear();
    Status r = bt::tick(*root_, ctx_);
    last_status_.clear();
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Tick;
    ev.tick = global_tick_;
    ev.status = r;
    for (const LeafEvent& e : ctx_.last_tick_events()) {
        last_status_[e.node_id] = e.status;
        ev.leaves.emplace_back(e.node_id, e.status);
    }
    ev.completed = tick_completed_;
    trace_.events.push_back(std::move(ev));
    ++trace_.ticks;
    ++global_tick_;
    return r;
}

void Planner::collect_condition_leaves_level_order(std::vector<const BTNode*>& out) const {
    std::deque<const BTNode*> queue{root_.get()};
    while (!queue.empty()) {
        const BTNode* n = queue.front();
        queue.pop_front();
        if (n->kind == NodeKind::Condition) out.push_back(n);
        for (const auto& c : n->children) queue.push_back(c.get());
    }
}

std::optional<Fluent> Planner::get_condition_to_expand() {
    std::vector<const BTNode*> conditions;
    collect_condition_leaves_level_order(conditions);
    for (const BTNode* n : conditions) {
        auto st = last_status_.find(n->id);
        if (st == last_status_.end() || st->second != Status::Failure) continue;
        auto cf = condition_of_.find(n->id);
        if (cf == condition_of_.end()) continue;
        if (expanded_.count(cf->second.key())) continue;
        expanded_.insert(cf->second.key());
        pending_leaf_id_ = n->id;
        pending_fluent_ = cf->second;
        return cf->second;
    }
    return std::nullopt;
}

void Planner::expand_tree() {
    if (pending_leaf_id_.empty())
        throw Error(Errc::MalformedTree, "expand_tree without a pending condition");
    std::vector<ActionBinding> rows = achievers(pending_fluent_);
    if (rows.empty()) throw Error(Errc::NoAchiever, pending_fluent_.text());

    NodeList kids;
    kids.push_back(make_condition_leaf(pending_fluent_));
    for (const ActionBinding& b : rows) kids.push_back(make_action_row(b));
    std::string sub_id = "p" + std::to_string(next_id_++);
    NodePtr subtree = fallback_memory(sub_id, std::move(kids));

    BTNode* parent = find_parent(root_.get(), pending_leaf_id_);
    if (!parent) throw Error(Errc::MalformedTree, "pending condition leaf not in tree");
    for (auto& slot : parent->children) {
        if (slot->id == pending_leaf_id_) {
            condition_of_.erase(pending_leaf_id_);
            slot = std::move(subtree);
            break;
        }
    }
    newest_subtree_id_ = sub_id;
    newest_fluent_ = pending_fluent_;
    newest_subtree_moved_ = false;
    promotions_of_newest_ = 0;

    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Expansion;
    ev.tick = global_tick_;
    ev.detail = pending_fluent_.text();
    trace_.events.push_back(std::move(ev));
    ++trace_.expansions;
    pending_leaf_id_.clear();
}

bool Planner::detect_conflict() const {
    if (newest_subtree_id_.empty()) return false;
    // An action executes before the new subtree only when both sit under a
    // common Sequence-like ancestor with the action's branch to the left:
    // sequence progression carries earlier effects into later children.
    // Earlier children of a Fallback ancestor are alternatives to the
    // subtree — only one of them runs on a given attempt — so their
    // effects never precede it.
    std::vector<const BTNode*> path;
    std::function<bool(const BTNode&)> descend = [&](const BTNode& n) -> bool {
        path.push_back(&n);
        if (n.id == newest_subtree_id_) return true;
        for (const auto& c : n.children)
            if (descend(*c)) return true;
        path.pop_back();
        return false;
    };
    if (!descend(*root_)) return false;

    std::vector<Fluent> earlier_effects;
    auto harvest = [&](const BTNode& n) {
        visit(n, [&](const BTNode& m) {
            if (m.kind != NodeKind::Action) return;
            auto it = action_of_.find(m.id);
            if (it != action_of_.end())
                for (const Fluent& e : it->second.action.eff) earlier_effects.push_back(e);
        });
    };
    for (std::size_t d = 0; d + 1 < path.size(); ++d) {
        const BTNode* anc = path[d];
        if (anc->kind != NodeKind::Sequence && anc->kind != NodeKind::SequenceMemory &&
            anc->kind != NodeKind::Parallel)
            continue;
        for (const auto& c : anc->children) {
            if (c.get() == path[d + 1]) break;
            harvest(*c);
        }
    }

    const BTNode* sub = path.back();
    bool conflict = false;
    visit(*sub, [&](const BTNode& n) {
        if (conflict || n.kind != NodeKind::Action) return;
        auto it = action_of_.find(n.id);
        if (it == action_of_.end()) return;
        for (const auto& disjunct : it->second.action.con) {
            if (disjunct.size() != 1) continue;  // disjunctive guards are not conflict-checked
            Fluent negated = disjunct.front().negate();
            for (const Fluent& e : earlier_effects)
                if (e == negated) {
                    conflict = true;
                    return;
                }
        }
    });
    return conflict;
}

void Planner::increase_priority() {
    if (newest_subtree_id_.empty())
        throw Error(Errc::MalformedTree, "no subtree to promote");
    if (++promotions_of_newest_ > kPromotionCap)
        throw Error(Errc::NoProgress,
                    "promotion cap reached while resolving conflict for " + newest_fluent_.text());
    BTNode* parent = find_parent(root_.get(), newest_subtree_id_);
    if (!parent) throw Error(Errc::MalformedTree, "subtree not in tree");
    auto& ch = parent->children;
    std::size_t k = 0;
    while (k < ch.size() && ch[k]->id != newest_subtree_id_) ++k;

    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Promotion;
    ev.tick = global_tick_;

    if (!newest_subtree_moved_) {
        // Leaving the expansion slot: keep the action row guarded by
        // restoring a bare copy of the expanded condition where the
        // subtree stood, and step the subtree just left of it.
        newest_subtree_moved_ = true;
        NodePtr sub = std::move(ch[k]);
        ch[k] = make_condition_leaf(newest_fluent_);
        ch.insert(ch.begin() + static_cast<std::ptrdiff_t>(k), std::move(sub));
        ev.detail = newest_fluent_.text() + ": re-guarded slot, stepped left";
    } else if (k > 0) {
        std::swap(ch[k - 1], ch[k]);
        ev.detail = newest_fluent_.text() + ": swapped left";
    } else {
        BTNode* gp = find_parent(root_.get(), parent->id);
        NodePtr sub = std::move(ch[k]);
        ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(k));
        if (!gp) {
            // Subtree was leftmost under the root: grow a new root above.
            std::string id = "p" + std::to_string(next_id_++);
            NodeList kids;
            kids.push_back(std::move(sub));
            kids.push_back(std::move(root_));
            root_ = sequence(id, std::move(kids));
            ev.detail = newest_fluent_.text() + ": lifted above root";
        } else {
            std::size_t pi = 0;
            while (pi < gp->children.size() && gp->children[pi]->id != parent->id) ++pi;
            gp->children.insert(gp->children.begin() + static_cast<std::ptrdiff_t>(pi),
                                std::move(sub));
            ev.detail = newest_fluent_.text() + ": lifted to parent level";
        }
    }
    ++trace_.promotions;
    trace_.events.push_back(std::move(ev));
}

int Planner::refine_actions() {
    const std::set<std::string> statics = domain_.static_fluent_names();
    std::vector<std::string> ids;
    ids.reserve(action_of_.size());
    for (const auto& [id, b] : action_of_) ids.push_back(id);
    int rebuilt = 0;
    for (const std::string& id : ids) {
        auto it = action_of_.find(id);
        if (it == action_of_.end()) continue;
        bool valid = true;
        for (const auto& disjunct : it->second.action.con) {
            bool all_static = std::all_of(disjunct.begin(), disjunct.end(), [&](const Fluent& c) {
                return statics.count(c.name) > 0;
            });
            if (!all_static) continue;
            if (!std::any_of(disjunct.begin(), disjunct.end(),
                             [&](const Fluent& c) { return world_.holds(c); })) {
                valid = false;
                break;
            }
        }
        if (valid) continue;

        const Fluent target = it->second.target;
        const std::string old_signature = it->second.action.signature;
        BTNode* row = find_parent(root_.get(), id);
        if (!row) continue;
        BTNode* holder = find_parent(root_.get(), row->id);
        if (!holder) continue;

        // Candidates: fresh groundings for the same target, excluding any
        // signature already present among the holder's rows.
        std::set<std::string> present;
        for (const auto& sibling : holder->children)
            visit(*sibling, [&](const BTNode& n) {
                auto ai = action_of_.find(n.id);
                if (ai != action_of_.end()) present.insert(ai->second.action.signature);
            });
        std::vector<ActionBinding> cands = achievers(target);
        cands.erase(std::remove_if(cands.begin(), cands.end(),
                                   [&](const ActionBinding& b) {
                                       return present.count(b.action.signature) > 0;
                                   }),
                    cands.end());
        if (cands.empty())
            throw Error(Errc::NoValidGrounding,
                        target.text() + ": no replacement grounding for " + old_signature);

        // Drop the old row's bookkeeping, then rebuild it in place.
        visit(*row, [&](const BTNode& n) {
            condition_of_.erase(n.id);
            action_of_.erase(n.id);
        });
        NodePtr fresh = make_action_row(cands.front());
        for (auto& slot : holder->children)
            if (slot->id == row->id) {
                slot = std::move(fresh);
                break;
            }
        ++rebuilt;
        ++trace_.refinements;
        TraceEvent ev;
        ev.kind = TraceEvent::Kind::Refinement;
        ev.tick = global_tick_;
        ev.detail = old_signature + " -> " + cands.front().action.signature;
        trace_.events.push_back(std::move(ev));
    }
    return rebuilt;
}

void Planner::perturb(const std::vector<Fluent>& effects) {
    world_.apply_all(effects);
    // External change invalidates latched child statuses in memory nodes:
    // a remembered Failure may have just become true (and vice versa).
    ctx_.memory.clear();
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Perturbation;
    ev.tick = global_tick_;
    std::vector<std::string> texts;
    texts.reserve(effects.size());
    for (const Fluent& e : effects) texts.push_back(e.text());
    ev.detail = joined(texts);
    trace_.events.push_back(std::move(ev));
}

PlanResult Planner::run(long max_iterations, const std::vector<ScriptedEvent>& script) {
    if (max_iterations < 1) throw Error(Errc::OutOfRange, "max_iterations must be >= 1");
    std::vector<ScriptedEvent> pending = script;
    std::stable_sort(pending.begin(), pending.end(),
                     [](const ScriptedEvent& a, const ScriptedEvent& b) { return a.tick < b.tick; });
    std::size_t si = 0;
    auto apply_due = [&] {
        while (si < pending.size() && pending[si].tick <= global_tick_) {
            perturb(pending[si].effects);
            ++si;
        }
    };

    PlanResult res;
    long expansion_passes = 0;
    for (;;) {
        int refined = 0;
        try {
            refined = refine_actions();
        } catch (const Error& e) {
            if (e.code() != Errc::NoValidGrounding) throw;
            res.outcome = PlanOutcome::CannotExpand;
            res.detail = e.what();
            break;
        }
        Status r;
        for (;;) {
            apply_due();
            r = tick_once();
            if (r != Status::Running) break;
            if (trace_.ticks >= kTickBudget) {
                res.outcome = PlanOutcome::BudgetExhausted;
                res.detail = "tick budget exhausted";
                res.trace = trace_;
                return res;
            }
        }
        if (r == Status::Success) {
            res.outcome = PlanOutcome::Success;
            break;
        }
        std::optional<Fluent> c = get_condition_to_expand();
        if (!c) {
            int repaired = 0;
            try {
                repaired = refine_actions();
            } catch (const Error& e) {
                if (e.code() != Errc::NoValidGrounding) throw;
                res.outcome = PlanOutcome::CannotExpand;
                res.detail = e.what();
                break;
            }
            if (repaired == 0 && refined == 0) {
                res.outcome = PlanOutcome::CannotExpand;
                res.detail = "execution failed with no expandable condition";
                break;
            }
            continue;
        }
        if (expansion_passes >= max_iterations) {
            res.outcome = PlanOutcome::BudgetExhausted;
            res.detail = "expansion budget (" + std::to_string(max_iterations) + ") exhausted";
            break;
        }
        ++expansion_passes;
        try {
            expand_tree();
        } catch (const Error& e) {
            if (e.code() != Errc::NoAchiever) throw;
            res.outcome = PlanOutcome::CannotExpand;
            res.detail = e.what();
            break;
        }
        if (detect_conflict()) {
            ++trace_.conflicts;
            TraceEvent ev;
            ev.kind = TraceEvent::Kind::Conflict;
            ev.tick = global_tick_;
            ev.detail = newest_fluent_.text() + ": precondition clash with an earlier action";
            trace_.events.push_back(std::move(ev));
            try {
                do {
                    increase_priority();
                } while (detect_conflict());
            } catch (const Error& e) {
                if (e.code() != Errc::NoProgress) throw;
                res.outcome = PlanOutcome::CannotExpand;
                res.detail = e.what();
                break;
            }
        }
    }
    res.trace = trace_;
    return res;
}

std::string Planner::leaf_label(const std::string& node_id) const {
    auto c = condition_of_.find(node_id);
    if (c != condition_of_.end()) return c->second.text();
    auto a = action_of_.find(node_id);
    if (a != action_of_.end()) return a->second.action.signature;
    return node_id;
}

const BTNode* Planner::find_node(const std::string& id) const {
    const BTNode* out = nullptr;
    visit(*root_, [&](const BTNode& n) {
        if (n.id == id) out = &n;
    });
    return out;
}

BTNode* Planner::find_parent(BTNode* from, const std::string& child_id) {
    for (auto& c : from->children) {
        if (c->id == child_id) return from;
        if (BTNode* p = find_parent(c.get(), child_id)) return p;
    }
    return nullptr;
}

PlanResult pabt_run(const Domain& domain, const WorldState& world, const std::vector<Fluent>& goal,
                    long max_iterations, const std::vector<ScriptedEvent>& script) {
    Planner planner(domain, world, goal);
    return planner.run(max_iterations, script);
}

// ---------------------------------------------------------------------------
// Offline backward chaining

namespace {

NodePtr backchain_build(const Fluent& goal, const Domain& domain, int budget,
                        std::set<std::string>& path, long& counter) {
    auto cond = [&](const Fluent& f) {
        return condition("b" + std::to_string(counter++), "c:" + f.text());
    };
    if (budget <= 0 || path.count(goal.key())) return cond(goal);
    std::vector<Grounding> rows = enumerate_achievers(domain, goal, nullptr);
    if (rows.empty()) return cond(goal);

    path.insert(goal.key());
    NodeList kids;
    kids.push_back(cond(goal));
    for (const Grounding& g : rows) {
        NodeList row;
        for (const auto& disjunct : g.action.con) {
            if (disjunct.size() == 1) {
                row.push_back(backchain_build(disjunct.front(), domain, budget - 1, path, counter));
            } else {
                NodeList options;
                for (const Fluent& c : disjunct)
                    options.push_back(backchain_build(c, domain, budget - 1, path, counter));
                row.push_back(fallback("b" + std::to_string(counter++), std::move(options)));
            }
        }
        row.push_back(action("b" + std::to_string(counter++), g.action.signature));
        kids.push_back(sequence("b" + std::to_string(counter++), std::move(row)));
    }
    path.erase(goal.key());
    return fallback("b" + std::to_string(counter++), std::move(kids));
}

}  // namespace

NodePtr backchain_ppa(const Fluent& goal, const Domain& domain, int depth_budget) {
    std::set<std::string> path;
    long counter = 0;
    return backchain_build(goal, domain, depth_budget, path, counter);
}

}  // namespace bt::plan
