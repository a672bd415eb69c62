#include "bt/statespace_models.hpp"

namespace bt::ss::models {

namespace {

// boundary comparisons with the shared tolerance
bool geq(double a, double b) { return a >= b - kBoundaryTol; }
bool leq(double a, double b) { return a <= b + kBoundaryTol; }
bool gt(double a, double b) { return a > b + kBoundaryTol; }

NamedSystem make(std::string name, double dt, Dynamics f, RegionSpec spec) {
    NamedSystem sys;
    sys.spec = spec;
    sys.bt.name = std::move(name);
    sys.bt.dim = 2;
    sys.bt.dt = dt;
    sys.bt.f = std::move(f);
    sys.bt.r = status_from_regions(sys.spec);
    return sys;
}

}  // namespace

NamedSystem walk_home() {
    RegionSpec spec;
    spec.success = [](const Vec& x) { return leq(x[0], 0.0); };
    spec.failure = [s = spec.success](const Vec& x) { return !s(x) && !geq(x[1], 0.48); };
    spec.running = [s = spec.success](const Vec& x) { return !s(x) && geq(x[1], 0.48); };
    spec.attraction = spec.running;  // the whole running region
    spec.tau = 10.0;
    return make("walk_home", 1.0, [](const Vec& x) { return Vec{x[0] - 0.1, x[1]}; }, spec);
}

NamedSystem sit_to_stand() {
    RegionSpec spec;
    spec.success = [](const Vec& x) { return geq(x[1], 0.48); };
    spec.failure = [](const Vec& x) { return !geq(x[1], 0.3); };
    spec.running = [s = spec.success, f = spec.failure](const Vec& x) { return !s(x) && !f(x); };
    spec.attraction = spec.running;
    spec.tau = 4.0;
    return make("sit_to_stand", 1.0, [](const Vec& x) { return Vec{x[0], x[1] + 0.05}; }, spec);
}

NamedSystem lie_to_sit() {
    RegionSpec spec;
    spec.success = [](const Vec& x) { return geq(x[1], 0.3); };
    spec.failure = nullptr;  // this posture change cannot fail
    spec.running = [s = spec.success](const Vec& x) { return !s(x); };
    spec.attraction = spec.running;
    spec.tau = 10.0;
    return make("lie_to_sit", 1.0, [](const Vec& x) { return Vec{x[0], x[1] + 0.03}; }, spec);
}

NamedSystem standing_fallback() {
    NamedSystem walk = walk_home(), sit = sit_to_stand(), lie = lie_to_sit();
    NamedSystem sys;
    sys.bt = compose_fallback_n({walk.bt, sit.bt, lie.bt});
    sys.bt.name = "standing_fallback";
    sys.spec.success = walk.spec.success;  // get home standing: x1 <= 0
    sys.spec.failure = nullptr;            // the rescue chain removes every failure region
    sys.spec.running = [s = sys.spec.success](const Vec& x) { return !s(x); };
    sys.spec.attraction = [](const Vec& x) {
        return gt(x[0], 0.0) && leq(x[0], 0.5) && geq(x[1], 0.0) && leq(x[1], 0.55);
    };
    sys.spec.tau = 24.0;  // the chained bound 10 + 4 + 10
    return sys;
}

SampledDomain humanoid_domain(int per_dim) {
    return SampledDomain::grid({0.0, 0.0}, {0.5, 0.55}, {per_dim, per_dim});
}

NamedSystem guarantee_power() {
    RegionSpec spec;
    spec.success = [](const Vec& x) {
        return geq(x[1], 100.0) || (geq(x[0], 0.1) && gt(x[1], 20.0));
    };
    spec.failure = nullptr;
    spec.running = [s = spec.success](const Vec& x) { return !s(x); };
    spec.attraction = nullptr;
    spec.tau = std::nullopt;
    return make("guarantee_power", 10.0,
                [](const Vec& x) {
                    if (x[0] < 0.1 && x[1] < 100.0) return Vec{x[0], x[1] + 1.0};  // charging
                    return Vec{x[0] - 1.0, x[1] - 0.1};  // headed to the charger
                },
                spec);
}

NamedSystem do_other_task() {
    RegionSpec spec;
    spec.success = [](const Vec&) { return false; };  // the task never ends
    spec.failure = nullptr;
    spec.running = [](const Vec&) { return true; };
    spec.attraction = nullptr;
    spec.tau = std::nullopt;
    return make("do_other_task", 10.0,
                [](const Vec& x) { return Vec{x[0] + (50.0 - x[0]) / 50.0, x[1] - 0.1}; }, spec);
}

Predicate battery_obstacle() {
    return [](const Vec& x) { return leq(x[1], 0.0); };
}

Predicate battery_invariant() {
    return [](const Vec& x) { return geq(x[0], 0.0) && leq(x[0], 100.0) && geq(x[1], 15.0); };
}

SampledDomain battery_domain(int per_dim) {
    return SampledDomain::grid({0.0, 15.0}, {100.0, 100.0}, {per_dim, per_dim});
}

std::optional<NamedSystem> find_system(const std::string& name) {
    if (name == "walk_home") return walk_home();
    if (name == "sit_to_stand") return sit_to_stand();
    if (name == "lie_to_sit") return lie_to_sit();
    if (name == "standing_fallback") return standing_fallback();
    if (name == "guarantee_power") return guarantee_power();
    if (name == "do_other_task") return do_other_task();
    return std::nullopt;
}

std::vector<std::string> system_names() {
    return {"walk_home",         "sit_to_stand",    "lie_to_sit",
            "standing_fallback", "guarantee_power", "do_other_task"};
}

}  // namespace bt::ss::models
