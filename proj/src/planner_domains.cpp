#include "bt/planner_domains.hpp"

namespace bt::plan {

namespace {

/// Symmetric edge facts for an undirected graph, forward pair first.
void add_edge(std::vector<Fluent>& facts, const std::string& a, const std::string& b) {
    facts.push_back(fluent("edge", {a, b}));
    facts.push_back(fluent("edge", {b, a}));
}

}  // namespace

PlanningProblem graph_problem() {
    PlanningProblem p;
    // Constants ordered so that free-parameter enumeration lists the
    // goal's predecessors nearest-to-goal first (s_g from s5 before s3,
    // s5 from s4 before s_g, and so on).
    p.domain.constants = {"s4", "s5", "s1", "s3", "s0", "s2", "s_g"};

    ActionTemplate move;
    move.name = "move";
    move.params = {"?from", "?to"};
    move.con = {{fluent("edge", {"?from", "?to"})}, {fluent("at", {"?from"})}};
    move.eff = {fluent("at", {"?to"}), negation("at", {"?from"})};
    p.domain.templates.push_back(std::move(move));

    std::vector<Fluent> facts = {fluent("at", {"s0"})};
    add_edge(facts, "s0", "s1");
    add_edge(facts, "s0", "s2");
    add_edge(facts, "s1", "s3");
    add_edge(facts, "s2", "s4");
    add_edge(facts, "s4", "s5");
    add_edge(facts, "s3", "s_g");
    add_edge(facts, "s5", "s_g");
    p.init = WorldState::from(facts);
    p.goal = {fluent("at", {"s_g"})};
    return p;
}

PlanningProblem cube_problem() {
    PlanningProblem p;
    p.domain.constants = {"cube", "goal"};

    ActionTemplate place;
    place.name = "place";
    place.con = {{fluent("holding_cube")}, {fluent("near", {"goal"})}};
    place.eff = {fluent("cube_in_goal"), fluent("hand_empty"), negation("holding_cube")};
    p.domain.templates.push_back(std::move(place));

    ActionTemplate pick;
    pick.name = "pick";
    pick.con = {{fluent("near", {"cube"})}, {fluent("hand_empty")}};
    pick.eff = {fluent("holding_cube"), negation("hand_empty")};
    p.domain.templates.push_back(std::move(pick));

    ActionTemplate moveto;
    moveto.name = "moveto";
    moveto.params = {"?place"};
    moveto.con = {{fluent("path_free")}};
    moveto.eff = {fluent("near", {"?place"})};
    p.domain.templates.push_back(std::move(moveto));

    p.init = WorldState::from({fluent("hand_empty"), fluent("path_free")});
    p.goal = {fluent("cube_in_goal")};
    return p;
}

PlanningProblem door_problem() {
    PlanningProblem p;

    ActionTemplate go_inside;
    go_inside.name = "go_inside";
    go_inside.con = {{fluent("door_open")}};
    go_inside.eff = {fluent("inside_house")};
    p.domain.templates.push_back(std::move(go_inside));

    ActionTemplate open_door;
    open_door.name = "open_door";
    open_door.con = {{fluent("door_unlocked")}};
    open_door.eff = {fluent("door_open")};
    p.domain.templates.push_back(std::move(open_door));

    ActionTemplate brake_door_open;
    brake_door_open.name = "brake_door_open";
    brake_door_open.con = {{fluent("has_crowbar")}, {fluent("door_weak")}};
    brake_door_open.eff = {fluent("door_open")};
    p.domain.templates.push_back(std::move(brake_door_open));

    p.init = WorldState::from({fluent("door_unlocked")});
    p.goal = {fluent("inside_house")};
    return p;
}

}  // namespace bt::plan
