#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bt/statespace.hpp"

/// Worked state-space systems shipped with the library, addressable by name
/// from the command line. Two families:
///
/// - a standing-up humanoid: walk_home / sit_to_stand / lie_to_sit posture
///   controllers over (x1 = distance from home, x2 = vertical torso position),
///   one step per second, plus their fallback composition standing_fallback;
/// - a battery-safe task robot: guarantee_power / do_other_task over
///   (x1 = distance from charger, x2 = battery percent), ten seconds per step.
///
/// All region predicates use a 1e-9 boundary tolerance so that exact
/// threshold hits under floating-point iteration count as inside.
namespace bt::ss::models {

inline constexpr double kBoundaryTol = 1e-9;

struct NamedSystem {
    StateSpaceBT bt;
    RegionSpec spec;
};

NamedSystem walk_home();         ///< succeed at x1 <= 0, walking 0.1 per step; bound 10
NamedSystem sit_to_stand();      ///< raise x2 from [0.3, 0.48) by 0.05 per step; bound 4
NamedSystem lie_to_sit();        ///< raise x2 below 0.3 by 0.03 per step; bound 10
NamedSystem standing_fallback(); ///< Fallback(walk_home, sit_to_stand, lie_to_sit); bound 24

/// Grid over [0, 0.5] x [0, 0.55].
SampledDomain humanoid_domain(int per_dim = 50);

NamedSystem guarantee_power();  ///< keep battery usable: return to charger and charge
NamedSystem do_other_task();    ///< drift toward the task site at x1 = 50, draining battery

Predicate battery_obstacle();   ///< battery empty: x2 <= 0
Predicate battery_invariant();  ///< I = {x1 in [0,100], x2 >= 15}
inline constexpr double kBatteryMargin = 5.0;  ///< step-length margin d

/// Grid over [0, 100] x [15, 100] (the initialization region).
SampledDomain battery_domain(int per_dim = 50);

/// Built-in lookup for the CLI; empty optional when the name is unknown.
std::optional<NamedSystem> find_system(const std::string& name);
std::vector<std::string> system_names();

}  // namespace bt::ss::models
