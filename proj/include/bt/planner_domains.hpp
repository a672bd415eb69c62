#pragma once

#include "bt/planner.hpp"

namespace bt::plan {

/// A ready-to-run planning problem: domain, initial world, goal conjunction.
struct PlanningProblem {
    Domain domain;
    WorldState init;
    std::vector<Fluent> goal;
};

/// Mobile agent on a fixed undirected graph of seven places. Single template
/// move(x, y) guarded by a static edge relation; starting at s0 with the
/// goal at(s_g). Expansion discovers predecessors outward from the goal and
/// the executed path coincides with breadth-first shortest path s0-s1-s3-s_g.
[[nodiscard]] PlanningProblem graph_problem();

/// Pick-and-place in a one-cube world: fluents cube_in_goal, holding_cube,
/// hand_empty, near_cube, near_goal, path_free over templates place, pick,
/// and moveto(x). Four expansions, then the plan executes in one pass.
[[nodiscard]] PlanningProblem cube_problem();

/// Get-inside-the-house domain used for offline backward chaining: go_inside
/// needs the door open, which is achieved either by opening an unlocked door
/// or by braking it open with a crowbar when it is weak.
[[nodiscard]] PlanningProblem door_problem();

}  // namespace bt::plan
